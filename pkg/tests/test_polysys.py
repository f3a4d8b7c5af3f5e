import numpy as np
import pytest

from chernum import (
    InputError,
    Polynomial,
    PolySystem,
    evaluate,
    jacobian,
    parse_system,
    random_dense_form,
    random_ideal_element,
    relative_residuals,
    serialize_system,
    variable,
)
from chernum._fasteval import SystemEvaluator
from chernum.corpus import corpus_path, twisted_cubic

from oracles import fd_jacobian, naive_evaluate, twisted_cubic_points


class TestEvaluate:
    def test_cubic_generator_vanishes_on_curve_point(self, cubic):
        # x^2 - wy at (1,1,1,1), a point of the curve
        assert evaluate(cubic.polys[0], np.array([1, 1, 1, 1], dtype=complex)) == 0

    def test_coordinate_vanishing(self):
        z0 = variable(0, 2)
        assert evaluate(z0, np.array([0.0, 1.0])) == 0

    def test_matches_naive_summation_oracle(self):
        rng = np.random.default_rng(101)
        for _ in range(25):
            p = random_dense_form(4, 3, rng)
            x = rng.normal(size=4) + 1j * rng.normal(size=4)
            got = evaluate(p, x)
            want = naive_evaluate(p.terms, x)
            assert abs(got - want) <= 1e-12 * max(1.0, abs(want))

    def test_dimension_mismatch(self):
        p = variable(0, 3)
        with pytest.raises(InputError):
            evaluate(p, np.array([1.0, 2.0]))

    def test_system_evaluator_matches_per_polynomial(self, cubic):
        rng = np.random.default_rng(5)
        for _ in range(10):
            x = rng.normal(size=4) + 1j * rng.normal(size=4)
            vals = cubic.evaluate(x)
            direct = np.array([p.evaluate(x) for p in cubic.polys])
            assert np.allclose(vals, direct, rtol=1e-13, atol=1e-13)

    def test_numba_and_numpy_kernels_agree(self, cubic):
        rng = np.random.default_rng(6)
        polys = [random_dense_form(5, d, rng) for d in (1, 2, 3, 4)]
        ev_py = SystemEvaluator.from_polys(polys, 5, use_numba=False)
        ev_nb = SystemEvaluator.from_polys(polys, 5, use_numba=True)
        for _ in range(5):
            x = rng.normal(size=5) + 1j * rng.normal(size=5)
            v1, J1 = ev_py.values_and_jacobian(x)
            v2, J2 = ev_nb.values_and_jacobian(x)
            assert np.allclose(v1, v2, rtol=1e-13)
            assert np.allclose(J1, J2, rtol=1e-13)
            assert np.allclose(ev_py.values(x), v1)
            assert np.allclose(ev_nb.values(x), v2)


class TestJacobian:
    def test_univariate_square(self):
        sys1 = PolySystem([variable(0, 1) * variable(0, 1)])
        J = jacobian(sys1, np.array([3.0 + 0j]))
        assert J.shape == (1, 1)
        assert J[0, 0] == pytest.approx(6.0)

    def test_cubic_rank_two_at_smooth_point(self, cubic):
        x = np.array([1.0, 1.0, 1.0, 1.0], dtype=complex)
        J = jacobian(cubic, x)
        J_fd = fd_jacobian(cubic, x)
        assert np.allclose(J, J_fd, atol=1e-6)
        svals = np.linalg.svd(J, compute_uv=False)
        assert np.sum(svals > 1e-8 * svals[0]) == 2

    def test_euler_identity(self, cubic):
        rng = np.random.default_rng(77)
        degs = np.array(cubic.degrees())
        for _ in range(100):
            x = rng.normal(size=4) + 1j * rng.normal(size=4)
            lhs = jacobian(cubic, x) @ x
            rhs = degs * cubic.evaluate(x)
            scale = np.abs(rhs).max() + 1.0
            assert np.abs(lhs - rhs).max() < 1e-10 * scale


class TestArithmetic:
    def test_homogeneity_preserved(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a = random_dense_form(3, 2, rng)
            b = random_dense_form(3, 2, rng)
            c = random_dense_form(3, 3, rng)
            assert (a + b).degree == 2
            assert (a * c).degree == 5
            assert a.diff(1).degree == 1

    def test_mixed_degrees_rejected(self):
        with pytest.raises(InputError):
            Polynomial({(1, 0): 1.0, (2, 0): 1.0}, 2)

    def test_addition_of_different_degrees_rejected(self):
        a = random_dense_form(3, 2, np.random.default_rng(0))
        b = random_dense_form(3, 3, np.random.default_rng(1))
        with pytest.raises(InputError):
            a + b

    def test_cancellation_keeps_degree(self):
        a = variable(0, 2) * variable(0, 2)
        z = a - a
        assert z.is_zero and z.degree == 2

    def test_diff_matches_finite_differences(self):
        rng = np.random.default_rng(9)
        p = random_dense_form(3, 4, rng)
        x = rng.normal(size=3) + 1j * rng.normal(size=3)
        h = 1e-6
        for j in range(3):
            xp, xm = x.copy(), x.copy()
            xp[j] += h
            xm[j] -= h
            fd = (naive_evaluate(p.terms, xp) - naive_evaluate(p.terms, xm)) / (2 * h)
            assert abs(p.diff(j).evaluate(x) - fd) < 1e-6


class TestRandomIdealElement:
    def test_constant_multipliers_at_minimal_degree(self, cubic):
        rng = np.random.default_rng(12)
        elem = random_ideal_element(cubic, 2, rng)
        assert elem.degree == 2
        # a combination of the three quadrics has only their monomials
        allowed = set()
        for p in cubic.polys:
            allowed.update(p.terms)
        assert set(elem.terms) <= allowed

    def test_vanishes_on_curve(self, cubic):
        rng = np.random.default_rng(13)
        elem = random_ideal_element(cubic, 3, rng)
        assert elem.degree == 3
        scale = elem.coefficient_norm()
        for pt in twisted_cubic_points(np.random.default_rng(14), 20):
            pt = pt / np.linalg.norm(pt)
            assert abs(elem.evaluate(pt)) < 1e-10 * scale

    def test_degree_vector_request(self, cubic):
        rng = np.random.default_rng(15)
        cfg_degrees = (2, 2, 3)
        polys = [random_ideal_element(cubic, d, rng) for d in cfg_degrees]
        assert tuple(p.degree for p in polys) == cfg_degrees

    def test_relative_residual_where_generators_vanish(self, cubic, segre):
        rng = np.random.default_rng(16)
        for target in (2, 3, 4):
            elem = random_ideal_element(cubic, target, rng)
            sys_elem = PolySystem([elem])
            for pt in twisted_cubic_points(rng, 10):
                assert relative_residuals(sys_elem, pt).max() < 1e-8

    def test_error_when_no_generator_usable(self, cubic):
        with pytest.raises(InputError):
            random_ideal_element(cubic, 1, np.random.default_rng(0))


class TestParseSerialize:
    def test_round_trip_twisted_cubic_file(self):
        text = corpus_path("twisted_cubic").read_text()
        system = parse_system(text)
        assert serialize_system(system) == text
        assert system.degrees() == (2, 2, 2)
        # terms identical to the builder
        built = twisted_cubic()
        assert [p.terms for p in system.polys] == [p.terms for p in built.polys]

    def test_serialize_parse_identity(self):
        rng = np.random.default_rng(21)
        system = PolySystem([random_dense_form(3, d, rng) for d in (1, 2, 2)])
        reparsed = parse_system(serialize_system(system))
        assert [p.terms for p in reparsed.polys] == [p.terms for p in system.polys]

    def test_rejects_non_homogeneous(self):
        with pytest.raises(InputError, match="non-homogeneous"):
            parse_system("vars: x y\nx^2 + y\n")

    def test_rejects_unknown_variable(self):
        with pytest.raises(InputError, match="unknown variable"):
            parse_system("vars: x y\nx*q\n")

    def test_rejects_missing_header(self):
        with pytest.raises(InputError, match="vars"):
            parse_system("x^2\n")

    def test_rejects_malformed_token(self):
        with pytest.raises(InputError):
            parse_system("vars: x y\n(1,2*x\n")

    def test_comments_and_bare_coefficients(self):
        system = parse_system(
            "# a comment\nvars: x y\n(2,0)*x^2 + (0,1)*x*y  # trailing\n"
        )
        p = system.polys[0]
        assert p.terms[(2, 0)] == 2.0
        assert p.terms[(1, 1)] == 1j

    def test_parse_of_shipped_threefold_file(self):
        system = parse_system(corpus_path("determinantal_threefold").read_text())
        assert len(system.polys) == 5
        assert system.degrees() == (4, 4, 4, 4, 4)

    def test_rejects_zero_polynomial_line(self):
        with pytest.raises(InputError):
            parse_system("vars: x y\n(1,0)*x + (-1,0)*x\n")
