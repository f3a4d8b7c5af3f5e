"""Sparse homogeneous polynomials over complex coefficients.

Data model
----------
A monomial is a tuple of non-negative integer exponents, one per homogeneous
coordinate.  A :class:`Polynomial` is an immutable map from monomials to
complex coefficients, all of the same total degree.  A :class:`PolySystem` is
an ordered list of polynomials in a common set of variables.  Projective
points are plain complex numpy vectors; helpers below handle normalization
and projective distance.

The module also provides the canonical text format for systems (see
:func:`parse_system` / :func:`serialize_system`) and the construction of
random ideal elements used throughout the pipeline.
"""

from __future__ import annotations

import re
from itertools import combinations_with_replacement
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from ._fasteval import SystemEvaluator
from .errors import InputError

Exponents = tuple[int, ...]
# A projective point is a non-zero complex vector of length num_vars.
Point = np.ndarray


def monomial_degree(exps: Exponents) -> int:
    return sum(exps)


class Polynomial:
    """A homogeneous polynomial with complex coefficients.

    Immutable after construction.  Terms with an exactly-zero coefficient are
    dropped; all remaining terms must share the same total degree.  The zero
    polynomial is representable but must carry an explicit degree.
    """

    __slots__ = ("terms", "num_vars", "degree", "_sorted")

    def __init__(
        self,
        terms: Mapping[Exponents, complex],
        num_vars: int,
        degree: int | None = None,
    ):
        if num_vars < 1:
            raise InputError("a polynomial needs at least one variable")
        clean: dict[Exponents, complex] = {}
        deg = None
        for exps, coeff in terms.items():
            coeff = complex(coeff)
            if coeff == 0:
                continue
            exps = tuple(int(e) for e in exps)
            if len(exps) != num_vars:
                raise InputError(
                    f"monomial {exps} has {len(exps)} exponents, expected {num_vars}"
                )
            if any(e < 0 for e in exps):
                raise InputError(f"negative exponent in monomial {exps}")
            d = monomial_degree(exps)
            if deg is None:
                deg = d
            elif d != deg:
                raise InputError(
                    f"not homogeneous: term of degree {d} mixed with degree {deg}"
                )
            clean[exps] = clean.get(exps, 0.0) + coeff
        clean = {e: c for e, c in clean.items() if c != 0}
        if not clean:
            deg = degree
            if deg is None:
                raise InputError("zero polynomial requires an explicit degree")
        elif degree is not None and degree != deg:
            raise InputError(f"declared degree {degree} != actual degree {deg}")
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "degree", int(deg))
        object.__setattr__(self, "_sorted", None)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # -- basic queries ------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def sorted_terms(self) -> list[tuple[Exponents, complex]]:
        """Terms in descending graded-lexicographic order (cached).

        All terms share one degree, so this is plain descending lex; the fixed
        order makes floating-point sums reproducible.
        """
        cached = self._sorted
        if cached is None:
            cached = sorted(self.terms.items(), key=lambda t: t[0], reverse=True)
            object.__setattr__(self, "_sorted", cached)
        return cached

    def coefficient_norm(self) -> float:
        return float(np.sqrt(sum(abs(c) ** 2 for c in self.terms.values())))

    # -- evaluation and calculus -------------------------------------------

    def evaluate(self, x: Point) -> complex:
        """Evaluate at a point, summing terms in the fixed sorted order."""
        x = np.asarray(x)
        if x.shape != (self.num_vars,):
            raise InputError(
                f"point has shape {x.shape}, expected ({self.num_vars},)"
            )
        total = 0.0 + 0.0j
        for exps, coeff in self.sorted_terms():
            val = coeff
            for xj, e in zip(x, exps):
                if e:
                    val *= xj**e
            total += val
        return total

    def diff(self, var: int) -> Polynomial:
        """Partial derivative with respect to variable index ``var``."""
        if not 0 <= var < self.num_vars:
            raise InputError(f"variable index {var} out of range")
        out: dict[Exponents, complex] = {}
        for exps, coeff in self.terms.items():
            e = exps[var]
            if e == 0:
                continue
            new = exps[:var] + (e - 1,) + exps[var + 1 :]
            out[new] = out.get(new, 0.0) + e * coeff
        return Polynomial(out, self.num_vars, degree=max(self.degree - 1, 0))

    # -- arithmetic ---------------------------------------------------------

    def _check_compatible(self, other: Polynomial):
        if self.num_vars != other.num_vars:
            raise InputError("operands have different variable counts")

    def __add__(self, other: Polynomial) -> Polynomial:
        self._check_compatible(other)
        if not self.is_zero and not other.is_zero and self.degree != other.degree:
            raise InputError(
                f"cannot add degree {self.degree} and degree {other.degree}"
            )
        out = dict(self.terms)
        for exps, coeff in other.terms.items():
            out[exps] = out.get(exps, 0.0) + coeff
        deg = self.degree if not self.is_zero else other.degree
        return Polynomial(out, self.num_vars, degree=deg)

    def __neg__(self) -> Polynomial:
        return Polynomial(
            {e: -c for e, c in self.terms.items()}, self.num_vars, self.degree
        )

    def __sub__(self, other: Polynomial) -> Polynomial:
        return self + (-other)

    def __mul__(self, other: Polynomial) -> Polynomial:
        self._check_compatible(other)
        out: dict[Exponents, complex] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                prod = tuple(a + b for a, b in zip(e1, e2))
                out[prod] = out.get(prod, 0.0) + c1 * c2
        return Polynomial(out, self.num_vars, degree=self.degree + other.degree)

    def scaled(self, factor: complex) -> Polynomial:
        return Polynomial(
            {e: factor * c for e, c in self.terms.items()}, self.num_vars, self.degree
        )

    def power(self, exponent: int) -> Polynomial:
        if exponent < 0:
            raise InputError("negative power")
        result = constant_one(self.num_vars)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (
            self.num_vars == other.num_vars
            and self.degree == other.degree
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.num_vars, self.degree, frozenset(self.terms.items())))

    def __repr__(self):
        n = len(self.terms)
        return f"Polynomial(degree={self.degree}, vars={self.num_vars}, terms={n})"


def constant_one(num_vars: int) -> Polynomial:
    return Polynomial({(0,) * num_vars: 1.0}, num_vars)


def variable(index: int, num_vars: int) -> Polynomial:
    exps = [0] * num_vars
    exps[index] = 1
    return Polynomial({tuple(exps): 1.0}, num_vars)


def linear_form(coeffs: Sequence[complex]) -> Polynomial:
    """The linear form sum_j coeffs[j] * z_j."""
    num_vars = len(coeffs)
    terms = {}
    for j, c in enumerate(coeffs):
        exps = [0] * num_vars
        exps[j] = 1
        terms[tuple(exps)] = c
    return Polynomial(terms, num_vars, degree=1)


class PolySystem:
    """An ordered list of homogeneous polynomials in common variables."""

    __slots__ = (
        "polys",
        "num_vars",
        "var_names",
        "_evaluator",
        "_taylor_cache",
        "_coeff_norms",
        "_start_structure",
    )

    def __init__(
        self,
        polys: Sequence[Polynomial],
        var_names: Sequence[str] | None = None,
    ):
        polys = tuple(polys)
        if not polys:
            raise InputError("a system needs at least one polynomial")
        num_vars = polys[0].num_vars
        for i, p in enumerate(polys):
            if p.num_vars != num_vars:
                raise InputError(
                    f"polynomial {i} has {p.num_vars} variables, expected {num_vars}"
                )
            if p.is_zero:
                raise InputError(f"polynomial {i} is zero")
        if var_names is not None:
            var_names = tuple(var_names)
            if len(var_names) != num_vars:
                raise InputError("var_names length does not match variable count")
        object.__setattr__(self, "polys", polys)
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "var_names", var_names)
        object.__setattr__(self, "_evaluator", None)
        object.__setattr__(self, "_taylor_cache", {})
        object.__setattr__(self, "_coeff_norms", None)
        object.__setattr__(self, "_start_structure", None)

    def __setattr__(self, name, value):
        raise AttributeError("PolySystem is immutable")

    def __len__(self) -> int:
        return len(self.polys)

    def __iter__(self) -> Iterator[Polynomial]:
        return iter(self.polys)

    def degrees(self) -> tuple[int, ...]:
        return tuple(p.degree for p in self.polys)

    def names(self) -> tuple[str, ...]:
        if self.var_names is not None:
            return self.var_names
        return tuple(f"z{j}" for j in range(self.num_vars))

    def coefficient_norms(self) -> np.ndarray:
        norms = self._coeff_norms
        if norms is None:
            norms = np.array([p.coefficient_norm() for p in self.polys])
            object.__setattr__(self, "_coeff_norms", norms)
        return norms

    def coefficient_norm(self) -> float:
        return float(np.sqrt((self.coefficient_norms() ** 2).sum()))

    def evaluator(self) -> SystemEvaluator:
        ev = self._evaluator
        if ev is None:
            ev = SystemEvaluator.from_polys(self.polys, self.num_vars)
            object.__setattr__(self, "_evaluator", ev)
        return ev

    def evaluate(self, x: Point) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (self.num_vars,):
            raise InputError(f"point has shape {x.shape}, expected ({self.num_vars},)")
        return self.evaluator().values(x)

    def jacobian(self, x: Point) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (self.num_vars,):
            raise InputError(f"point has shape {x.shape}, expected ({self.num_vars},)")
        return self.evaluator().values_and_jacobian(x)[1]

    def __repr__(self):
        return f"PolySystem(degrees={self.degrees()}, vars={self.num_vars})"


# -- spec-level operations ---------------------------------------------------


def evaluate(p: Polynomial, x: Point) -> complex:
    """Evaluate one polynomial at a point (fixed term order)."""
    return p.evaluate(x)


def jacobian(sys: PolySystem, x: Point) -> np.ndarray:
    """The k x (r+1) matrix of partial derivatives of the system at x."""
    return sys.jacobian(x)


# -- projective point helpers -------------------------------------------------


def normalize_point(x: Point) -> Point:
    x = np.asarray(x, dtype=np.complex128)
    norm = np.linalg.norm(x)
    if norm == 0 or not np.isfinite(norm):
        raise InputError("cannot normalize a zero or non-finite vector")
    return x / norm


def projective_distance(x: Point, y: Point) -> float:
    """d(x,y) = sqrt(1 - |<x,y>|^2 / (|x|^2 |y|^2)), the sine of the angle."""
    x = np.asarray(x)
    y = np.asarray(y)
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    inner = abs(np.vdot(x, y)) / (nx * ny)
    return float(np.sqrt(max(0.0, 1.0 - min(inner, 1.0) ** 2)))


def relative_residuals(sys: PolySystem, x: Point) -> np.ndarray:
    """|F_i(x/|x|)| scaled by each polynomial's coefficient norm."""
    xu = normalize_point(x)
    vals = np.abs(sys.evaluate(xu))
    return vals / sys.coefficient_norms()


# -- random elements -----------------------------------------------------------


def unit_coefficients(count: int, rng: np.random.Generator) -> np.ndarray:
    """Complex numbers drawn uniformly from the unit circle."""
    angles = rng.uniform(0.0, 2.0 * np.pi, size=count)
    return np.exp(1j * angles)


def monomials_of_degree(num_vars: int, degree: int) -> list[Exponents]:
    """All exponent tuples of the given total degree, graded-lex descending."""
    out = []
    for combo in combinations_with_replacement(range(num_vars), degree):
        exps = [0] * num_vars
        for j in combo:
            exps[j] += 1
        out.append(tuple(exps))
    out.sort(reverse=True)
    return out


def random_dense_form(num_vars: int, degree: int, rng: np.random.Generator) -> Polynomial:
    """Dense homogeneous form with unit-circle coefficients."""
    monos = monomials_of_degree(num_vars, degree)
    coeffs = unit_coefficients(len(monos), rng)
    return Polynomial(dict(zip(monos, coeffs)), num_vars, degree=degree)


def random_ideal_element(
    gens: PolySystem, target_degree: int, rng: np.random.Generator
) -> Polynomial:
    """A random element sum_j q_j * F_j of the ideal, homogeneous of target_degree.

    Each usable generator F_j (deg F_j <= target_degree) is multiplied by a
    dense random form q_j of complementary degree with unit-circle
    coefficients.  Generators of larger degree are skipped; if none is usable
    an error is raised.
    """
    acc = Polynomial({}, gens.num_vars, degree=target_degree)
    used = 0
    for g in gens.polys:
        if g.degree > target_degree:
            continue
        q = random_dense_form(gens.num_vars, target_degree - g.degree, rng)
        acc = acc + q * g
        used += 1
    if used == 0:
        raise InputError(
            f"no generator has degree <= {target_degree}; cannot draw an ideal element"
        )
    return acc


# -- canonical text format ------------------------------------------------------

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z_0-9]*$")
_FACTOR_RE = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)(?:\^(\d+))?$")
_COEFF_RE = re.compile(r"^\(([^,()]+),([^,()]+)\)$")


def _format_float(x: float) -> str:
    return f"{x:.17g}"


def serialize_system(sys: PolySystem) -> str:
    """Canonical text form: a vars header then one polynomial per line.

    Terms are '+'-joined in descending graded-lex order, each as
    ``(re,im)*name^a*...`` with coefficients at 17 significant digits and
    zero exponents omitted.
    """
    names = sys.names()
    lines = ["vars: " + " ".join(names)]
    for p in sys.polys:
        parts = []
        for exps, coeff in p.sorted_terms():
            factors = [f"({_format_float(coeff.real)},{_format_float(coeff.imag)})"]
            for name, e in zip(names, exps):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            parts.append("*".join(factors))
        lines.append(" + ".join(parts))
    return "\n".join(lines) + "\n"


def _parse_coefficient(token: str, line_no: int) -> complex:
    m = _COEFF_RE.match(token)
    if m:
        try:
            return complex(float(m.group(1)), float(m.group(2)))
        except ValueError:
            raise InputError(f"line {line_no}: bad coefficient {token!r}") from None
    try:
        return complex(float(token))
    except ValueError:
        raise InputError(f"line {line_no}: malformed token {token!r}") from None


def _parse_term(token: str, names: dict[str, int], num_vars: int, line_no: int):
    factors = [f.strip() for f in token.split("*")]
    coeff = 1.0 + 0.0j
    exps = [0] * num_vars
    saw_coeff = False
    for f in factors:
        if not f:
            raise InputError(f"line {line_no}: empty factor in term {token!r}")
        fm = _FACTOR_RE.match(f)
        if fm:
            name, power = fm.group(1), fm.group(2)
            if name not in names:
                raise InputError(f"line {line_no}: unknown variable {name!r}")
            exps[names[name]] += int(power) if power is not None else 1
        else:
            if saw_coeff:
                raise InputError(f"line {line_no}: two coefficients in term {token!r}")
            coeff *= _parse_coefficient(f, line_no)
            saw_coeff = True
    return tuple(exps), coeff


def parse_system(text: str) -> PolySystem:
    """Parse the canonical system format; '#' starts a comment.

    Rejects non-homogeneous polynomials (reporting the offending term),
    unknown variables, and zero polynomials.
    """
    names: list[str] = []
    polys: list[Polynomial] = []
    name_index: dict[str, int] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not names:
            if not line.startswith("vars:"):
                raise InputError(f"line {line_no}: expected a 'vars:' header first")
            names = line[len("vars:") :].split()
            if not names:
                raise InputError(f"line {line_no}: empty variable list")
            for j, name in enumerate(names):
                if not _NAME_RE.match(name):
                    raise InputError(f"line {line_no}: bad variable name {name!r}")
                if name in name_index:
                    raise InputError(f"line {line_no}: duplicate variable {name!r}")
                name_index[name] = j
            continue
        terms: dict[Exponents, complex] = {}
        degree = None
        for token in (t.strip() for t in line.split("+")):
            if not token:
                raise InputError(f"line {line_no}: empty term")
            exps, coeff = _parse_term(token, name_index, len(names), line_no)
            d = monomial_degree(exps)
            if degree is None:
                degree = d
            elif d != degree:
                raise InputError(
                    f"line {line_no}: non-homogeneous polynomial "
                    f"(term {token!r} has degree {d}, expected {degree})"
                )
            terms[exps] = terms.get(exps, 0.0) + coeff
        poly = Polynomial(terms, len(names), degree=degree)
        if poly.is_zero:
            raise InputError(f"line {line_no}: polynomial is zero")
        polys.append(poly)
    if not names:
        raise InputError("no 'vars:' header found")
    if not polys:
        raise InputError("no polynomials found")
    return PolySystem(polys, var_names=names)
