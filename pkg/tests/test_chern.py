import math

import numpy as np
import pytest

from chernum import (
    InputError,
    NumericalError,
    PipelineConfig,
    PolySystem,
    Relation,
    algorithm_schedule,
    check_unimodular,
    chern_numbers,
    coefficient_vector,
    det_integer,
    dimension_of_z,
    draw_square_system,
    elementary_symmetric,
    solve_integer_system,
    variable,
)
from chernum.corpus import conic_negative_case

from oracles import (
    elementary_symmetric_bruteforce,
    fraction_det,
    fraction_solve,
)


class TestElementarySymmetric:
    def test_known_values(self):
        assert elementary_symmetric((2, 2, 2), 1) == 6
        assert elementary_symmetric((5, 5, 6, 6), 4) == 900
        assert elementary_symmetric((7, 11, 13), 0) == 1

    def test_out_of_range(self):
        with pytest.raises(InputError):
            elementary_symmetric((2, 3), 3)
        with pytest.raises(InputError):
            elementary_symmetric((2, 3), -1)

    def test_against_bruteforce(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            r = int(rng.integers(1, 9))
            degs = [int(d) for d in rng.integers(1, 12, size=r)]
            for k in range(r + 1):
                assert elementary_symmetric(degs, k) == (
                    elementary_symmetric_bruteforce(degs, k)
                )


# Known relation rows: (degrees, r, n) -> coefficient vector [a_0..a_n],
# paired with the known Chern degree vector and the resulting right side.
KNOWN_ROWS = [
    # abelian surface in P^4, C = (10, 0, 0)
    ((5, 5, 5, 6), 4, 2, [75, 16, 1], (10, 0, 0), 750),
    ((5, 5, 6, 6), 4, 2, [86, 17, 1], (10, 0, 0), 860),
    ((5, 6, 6, 6), 4, 2, [98, 18, 1], (10, 0, 0), 980),
    # determinantal threefold in P^5, C = (10, 0, 45, -46)
    ((4, 4, 4, 4, 4), 5, 3, [44, 61, 14, 1], (10, 0, 45, -46), 1024),
    ((4, 4, 4, 4, 5), 5, 3, [65, 71, 15, 1], (10, 0, 45, -46), 1279),
    ((4, 4, 4, 5, 5), 5, 3, [92, 82, 16, 1], (10, 0, 45, -46), 1594),
    ((4, 4, 5, 5, 5), 5, 3, [126, 94, 17, 1], (10, 0, 45, -46), 1979),
    # Segre hyperplane section in P^7, C = (4, 10, 10, 6)
    ((2, 2, 2, 2, 2, 2, 1), 7, 3, [-8, 4, 5, 1], (4, 10, 10, 6), 64),
    ((2, 2, 2, 2, 2, 3, 1), 7, 3, [-10, 7, 6, 1], (4, 10, 10, 6), 96),
    ((2, 2, 2, 2, 3, 3, 1), 7, 3, [-11, 11, 7, 1], (4, 10, 10, 6), 142),
    ((2, 2, 2, 3, 3, 3, 1), 7, 3, [-10, 16, 8, 1], (4, 10, 10, 6), 206),
    # twisted cubic in P^3, C = (3, 2)
    ((2, 2, 2), 3, 1, [2, 1], (3, 2), 8),
    ((2, 2, 3), 3, 1, [3, 1], (3, 2), 11),
]


class TestCoefficientVector:
    @pytest.mark.parametrize("degrees,r,n,coeffs,chern,rhs", KNOWN_ROWS)
    def test_known_rows(self, degrees, r, n, coeffs, chern, rhs):
        assert coefficient_vector(degrees, r, n) == coeffs

    @pytest.mark.parametrize("degrees,r,n,coeffs,chern,rhs", KNOWN_ROWS)
    def test_relation_identity_on_known_chern_vectors(
        self, degrees, r, n, coeffs, chern, rhs
    ):
        relation = Relation(tuple(coeffs), rhs, tuple(degrees))
        assert relation.dot(chern) == rhs
        assert relation.check(chern)

    def test_segre_column_conventions_agree(self):
        # six quadrics read in P^6, or the same plus the hyperplane in P^7
        assert coefficient_vector((2,) * 6, 6, 3) == coefficient_vector(
            (2,) * 6 + (1,), 7, 3
        )

    def test_leading_coefficient_is_one(self):
        rng = np.random.default_rng(8)
        for _ in range(30):
            r = int(rng.integers(2, 9))
            n = int(rng.integers(1, r))
            degs = [int(d) for d in rng.integers(1, 9, size=r)]
            assert coefficient_vector(degs, r, n)[n] == 1

    def test_curve_specialization(self):
        # dimension 1: the relation reads (sigma_1 - (r+1)) deg Z + deg c_1
        rng = np.random.default_rng(9)
        for _ in range(20):
            r = int(rng.integers(2, 9))
            degs = [int(d) for d in rng.integers(1, 9, size=r)]
            a = coefficient_vector(degs, r, 1)
            assert a == [sum(degs) - (r + 1), 1]

    def test_surface_specialization(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            r = int(rng.integers(3, 9))
            degs = [int(d) for d in rng.integers(1, 9, size=r)]
            a = coefficient_vector(degs, r, 2)
            s1 = elementary_symmetric(degs, 1)
            s2 = elementary_symmetric(degs, 2)
            assert a[2] == 1
            assert a[1] == s1 - (r + 1)
            assert a[0] == s2 - (r + 1) * s1 + math.comb(r + 2, 2)

    def test_validation(self):
        with pytest.raises(InputError):
            coefficient_vector((2, 2), 3, 1)
        with pytest.raises(InputError):
            coefficient_vector((2, 2, 2), 3, 4)


class TestExactLinearAlgebra:
    def test_det_against_fraction_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            n = int(rng.integers(1, 7))
            M = rng.integers(-9, 10, size=(n, n)).tolist()
            assert det_integer(M) == int(fraction_det(M))

    def test_det_singular(self):
        assert det_integer([[1, 2], [2, 4]]) == 0

    def test_solve_recovers_known_vector(self):
        rng = np.random.default_rng(12)
        for _ in range(25):
            n = int(rng.integers(1, 6))
            # random unimodular matrix from integer row operations
            M = np.eye(n, dtype=object)
            for _ in range(3 * n):
                i, j = rng.integers(0, n, size=2)
                if i != j:
                    M[i] = M[i] + int(rng.integers(-3, 4)) * M[j]
            M = [[int(v) for v in row] for row in M]
            assert det_integer(M) in (-1, 1)
            x = [int(v) for v in rng.integers(-50, 51, size=n)]
            rhs = [sum(M[i][j] * x[j] for j in range(n)) for i in range(n)]
            assert solve_integer_system(M, rhs) == x
            assert [int(v) for v in fraction_solve(M, rhs)] == x

    def test_solve_rejects_non_integral(self):
        with pytest.raises(NumericalError):
            solve_integer_system([[2]], [1])

    def test_solve_rejects_singular(self):
        with pytest.raises(NumericalError):
            solve_integer_system([[1, 1], [1, 1]], [1, 2])


class TestUnimodularity:
    def test_paper_shape(self):
        det = check_unimodular(algorithm_schedule(4, 5, 3), 5, 3)
        assert det in (-1, 1)

    def test_dimension_zero_edge(self):
        assert check_unimodular(algorithm_schedule(7, 4, 0), 4, 0) == 1

    def test_full_dimension_edge(self):
        det = check_unimodular(algorithm_schedule(3, 6, 5), 6, 5)
        assert det in (-1, 1)

    def test_random_schedules(self):
        rng = np.random.default_rng(13)
        for _ in range(60):
            r = int(rng.integers(2, 11))
            n = int(rng.integers(1, r))
            b = int(rng.integers(1, 21))
            schedule = algorithm_schedule(b, r, n)
            det = check_unimodular(schedule, r, n)
            assert det in (-1, 1)
            M = [coefficient_vector(row, r, n) for row in schedule]
            assert abs(int(fraction_det(M))) == 1

    def test_non_unimodular_rejected(self):
        # two identical rows make the matrix singular
        with pytest.raises(NumericalError):
            check_unimodular([(3, 3), (3, 3)], 2, 1)


class TestSchedule:
    def test_bump_pattern(self):
        assert algorithm_schedule(4, 5, 3) == [
            (4, 4, 4, 4, 4),
            (5, 4, 4, 4, 4),
            (5, 5, 4, 4, 4),
            (5, 5, 5, 4, 4),
        ]

    def test_needs_enough_slots(self):
        with pytest.raises(InputError):
            algorithm_schedule(2, 2, 2)


class TestDrawSquareSystem:
    def test_floor_enforced(self, cubic, cfg):
        with pytest.raises(InputError, match="allow_low_degrees"):
            draw_square_system(cubic, (2, 2, 1), cfg, np.random.default_rng(0))

    def test_floor_override(self, cubic):
        cfg = PipelineConfig(allow_low_degrees=True)
        square = draw_square_system(cubic, (2, 2, 2), cfg, np.random.default_rng(0))
        assert square.degrees() == (2, 2, 2)

    def test_shape_validation(self, cubic, cfg):
        with pytest.raises(InputError):
            draw_square_system(cubic, (2, 2), cfg, np.random.default_rng(0))

    def test_fixed_forms_counted(self, segre, cfg):
        hyp = segre.polys[6]
        square = draw_square_system(
            segre, (2,) * 6, cfg, np.random.default_rng(0), fixed_forms=[hyp]
        )
        assert square.degrees() == (2, 2, 2, 2, 2, 2, 1)
        assert square.polys[6] is hyp


class TestDimensionProbe:
    def test_conic_is_a_curve(self, cfg):
        conic, _ = conic_negative_case()
        assert dimension_of_z(conic, cfg, np.random.default_rng(21)) == 1

    def test_zero_dimensional_ideal_rejected(self, cfg):
        z0, z1 = variable(0, 3), variable(1, 3)
        points_only = PolySystem([z0, z1])
        with pytest.raises(InputError, match="zero-dimensional"):
            dimension_of_z(points_only, cfg, np.random.default_rng(22))


class TestChernNumbers:
    def test_twisted_cubic_default_schedule(self, cubic, cfg):
        res = chern_numbers(cubic, cfg, np.random.default_rng(23))
        assert res.dimension == 1
        assert res.chern_degrees == (3, 2)
        assert res.genus() == 0
        assert res.det_m in (-1, 1)
        assert res.residual_of_solve == 0.0
        for rel in res.relations:
            assert rel.check(res.chern_degrees)

    def test_conic_curve(self, cfg):
        conic, _ = conic_negative_case()
        res = chern_numbers(conic, cfg, np.random.default_rng(24))
        assert res.chern_degrees == (2, 2)
        assert res.genus() == 0

    def test_schedule_row_count_validated(self, cubic, cfg):
        with pytest.raises(InputError, match="rows"):
            chern_numbers(
                cubic, cfg, np.random.default_rng(25), schedule=[(2, 2, 2)] * 3
            )

    def test_schedule_row_length_validated(self, cubic, cfg):
        with pytest.raises(InputError):
            chern_numbers(
                cubic, cfg, np.random.default_rng(26), schedule=[(2, 2), (2, 3)]
            )

    def test_genus_only_for_curves(self, cfg):
        from chernum import ChernResult

        res = ChernResult(2, (1, 0, 0), [], 0.0, 1)
        with pytest.raises(InputError):
            res.genus()

    def test_equivalence_seed_independent(self, cubic, cfg):
        from chernum import equivalence_of_z

        square = draw_square_system(cubic, (2, 2, 3), cfg, np.random.default_rng(27))
        d1 = equivalence_of_z(cubic, square, cfg, np.random.default_rng(100))
        d2 = equivalence_of_z(cubic, square, cfg, np.random.default_rng(200))
        assert d1 == d2 == 11
