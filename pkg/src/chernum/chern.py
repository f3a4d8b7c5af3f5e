"""Intersection-theory layer: linear relations on Chern numbers.

For a square system of r hypersurfaces of degrees n_1..n_r in P^r whose zero
scheme is a smooth connected component Z (dimension n) together with a finite
set S, the degrees of the Chern classes c_0..c_n of Z satisfy

    sum_k a_k deg(c_k) = prod(n_i) - mu_S,

with integer coefficients a_k built from binomials and the elementary
symmetric functions of the degrees.  Running several degree tuples yields a
unimodular integer system whose exact solution is the Chern number vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InputError, NumericalError, TrackingError
from .polysys import (
    PolySystem,
    Polynomial,
    random_dense_form,
    random_ideal_element,
    relative_residuals,
)
from .tracker import (
    AffinePatch,
    HomotopyConfig,
    RESOLVED_STATUSES,
    solve_square_system,
)
from .zerodim import (
    ClassifyConfig,
    EndpointCluster,
    ISOLATED,
    classify_cluster,
    cluster_endpoints,
    total_residual_multiplicity,
)


# -- integer combinatorics -----------------------------------------------------


def elementary_symmetric(degrees: Sequence[int], k: int) -> int:
    """The k-th elementary symmetric function of the degrees, exactly."""
    degrees = [int(d) for d in degrees]
    if not 0 <= k <= len(degrees):
        raise InputError(f"k={k} out of range for {len(degrees)} degrees")
    e = [1] + [0] * k
    for d in degrees:
        for j in range(min(k, len(e) - 1), 0, -1):
            e[j] += d * e[j - 1]
    return e[k]


def coefficient_vector(degrees: Sequence[int], r: int, n: int) -> list[int]:
    """[a_0, ..., a_n] with a_k = sum_i (-1)^i C(r+i, i) sigma_{n-k-i}.

    Exact integer arithmetic; the leading coefficient a_n is always 1.
    """
    degrees = [int(d) for d in degrees]
    if len(degrees) != r:
        raise InputError(f"expected {r} degrees, got {len(degrees)}")
    if not 0 <= n <= r:
        raise InputError(f"dimension n={n} out of range for r={r}")
    sigma = [elementary_symmetric(degrees, j) for j in range(n + 1)]
    a = []
    for k in range(n + 1):
        a_k = 0
        for i in range(n - k + 1):
            a_k += (-1) ** i * math.comb(r + i, i) * sigma[n - k - i]
        a.append(a_k)
    if a[n] != 1:
        raise NumericalError("leading relation coefficient is not 1")
    return a


# -- exact integer linear algebra -----------------------------------------------


def det_integer(matrix: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    A = [[int(x) for x in row] for row in matrix]
    n = len(A)
    if any(len(row) != n for row in A):
        raise InputError("determinant needs a square matrix")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
            A[i][k] = 0
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def solve_integer_system(
    matrix: Sequence[Sequence[int]], rhs: Sequence[int]
) -> list[int]:
    """Exact solve of M x = d by Bareiss elimination and rational back-substitution.

    Requires the solution to be integral (guaranteed when |det M| = 1);
    raises otherwise.
    """
    n = len(matrix)
    A = [[int(x) for x in row] for row in matrix]
    d = [int(x) for x in rhs]
    if any(len(row) != n for row in A) or len(d) != n:
        raise InputError("solve needs a square matrix and a matching vector")
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    d[k], d[i] = d[i], d[k]
                    break
            else:
                raise NumericalError("matrix is singular")
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
            d[i] = (d[i] * A[k][k] - A[i][k] * d[k]) // prev
            A[i][k] = 0
        prev = A[k][k]
    if A[n - 1][n - 1] == 0:
        raise NumericalError("matrix is singular")
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        s = Fraction(d[i])
        for j in range(i + 1, n):
            s -= A[i][j] * x[j]
        x[i] = s / A[i][i]
    out = []
    for xi in x:
        if xi.denominator != 1:
            raise NumericalError("solution is not integral")
        out.append(int(xi))
    for i in range(n):
        if sum(matrix[i][j] * out[j] for j in range(n)) != rhs[i]:
            raise NumericalError("exact solve verification failed")
    return out


def algorithm_schedule(b: int, slots: int, n: int) -> list[tuple[int, ...]]:
    """The default degree schedule: start at (b,...,b), bump slot i after row i."""
    if n + 1 > slots:
        raise InputError(
            f"need at least {n + 1} adjustable degree slots, have {slots}"
        )
    l = [b] * slots
    rows = []
    for i in range(n + 1):
        rows.append(tuple(l))
        l[i] += 1
    return rows


def check_unimodular(
    degree_schedule: Sequence[Sequence[int]], r: int, n: int
) -> int:
    """Exact determinant of the relation matrix of a schedule; must be +-1."""
    M = [coefficient_vector(row, r, n) for row in degree_schedule]
    det = det_integer(M)
    if det not in (-1, 1):
        raise NumericalError(f"relation matrix has determinant {det}, expected +-1")
    return det


# -- result containers -----------------------------------------------------------


@dataclass(frozen=True)
class Relation:
    """One linear relation sum_k coeffs[k] * deg(c_k) = rhs."""

    coeffs: tuple[int, ...]
    rhs: int
    degrees_used: tuple[int, ...]

    def dot(self, chern_degrees: Sequence[int]) -> int:
        if len(chern_degrees) != len(self.coeffs):
            raise InputError("chern vector length mismatch")
        return sum(a * c for a, c in zip(self.coeffs, chern_degrees))

    def check(self, chern_degrees: Sequence[int]) -> bool:
        return self.dot(chern_degrees) == self.rhs


@dataclass
class ChernResult:
    """Solved Chern numbers with solve diagnostics."""

    dimension: int
    chern_degrees: tuple[int, ...]
    relations: list[Relation]
    residual_of_solve: float
    det_m: int

    @property
    def degree(self) -> int:
        return self.chern_degrees[0]

    def genus(self) -> int:
        """For a curve, the genus derived from deg(c_1) = 2 - 2g."""
        if self.dimension != 1:
            raise InputError("genus is only defined for curves (dimension 1)")
        c1 = self.chern_degrees[1]
        if (2 - c1) % 2 != 0:
            raise NumericalError(f"deg(c_1)={c1} is not of the form 2-2g")
        return (2 - c1) // 2


@dataclass(frozen=True)
class PipelineConfig:
    """End-to-end configuration: tracking, classification, execution."""

    tracking: HomotopyConfig = field(default_factory=HomotopyConfig)
    classify: ClassifyConfig = field(default_factory=ClassifyConfig)
    threads: int = 1
    allow_low_degrees: bool = False
    path_retries: int = 3


@dataclass
class SquareRunAnalysis:
    """Full record of one square-system continuation run."""

    degrees: tuple[int, ...]
    path_results: list
    clusters: list[EndpointCluster]
    bezout: int
    mu_s: int
    equivalence: int

    def isolated_count(self) -> int:
        return sum(1 for c in self.clusters if c.classification == ISOLATED)


# -- pipeline operations -----------------------------------------------------------


def analyze_square_system(
    square: PolySystem,
    ideal_gens: PolySystem,
    cfg: PipelineConfig,
    rng: np.random.Generator,
) -> SquareRunAnalysis:
    """Track, cluster and classify one square system against its ideal."""
    patch = AffinePatch.random(square.num_vars, rng)
    results = solve_square_system(
        square, cfg.tracking, patch, rng, threads=cfg.threads, retries=cfg.path_retries
    )
    failed = [pr.path_index for pr in results if pr.status not in RESOLVED_STATUSES]
    if failed:
        raise TrackingError(
            f"{len(failed)} path(s) unresolved after retries", failed_paths=failed
        )
    clusters = cluster_endpoints(
        results, cfg.classify.cluster_tol, square_sys=square, cfg=cfg.tracking
    )
    clusters = [
        classify_cluster(c, square, ideal_gens, cfg.classify) for c in clusters
    ]
    mu = total_residual_multiplicity(clusters)
    bezout = 1
    for d in square.degrees():
        bezout *= d
    return SquareRunAnalysis(
        degrees=square.degrees(),
        path_results=results,
        clusters=clusters,
        bezout=bezout,
        mu_s=mu,
        equivalence=bezout - mu,
    )


def equivalence_of_z(
    gens: PolySystem,
    square: PolySystem,
    cfg: PipelineConfig,
    rng: np.random.Generator,
) -> int:
    """prod(n_i) - mu_S for the given square system (its class on Z)."""
    return analyze_square_system(square, gens, cfg, rng).equivalence


def draw_square_system(
    gens: PolySystem,
    degrees: Sequence[int],
    cfg: PipelineConfig,
    rng: np.random.Generator,
    fixed_forms: Sequence[Polynomial] = (),
) -> PolySystem:
    """Random ideal elements of the requested degrees plus fixed forms.

    Degrees below the maximal generator degree are refused unless
    ``cfg.allow_low_degrees`` is set (lower degrees are only safe when the
    scheme is cut out scheme-theoretically in a smaller degree, which the
    caller must assert).
    """
    r = gens.num_vars - 1
    degrees = [int(d) for d in degrees]
    for f in fixed_forms:
        if f.num_vars != gens.num_vars:
            raise InputError("fixed form has a different variable count")
    if len(degrees) + len(fixed_forms) != r:
        raise InputError(
            f"need {r} forms total for P^{r}; got {len(degrees)} requested degrees "
            f"and {len(fixed_forms)} fixed forms"
        )
    b = max(gens.degrees())
    low = [d for d in degrees if d < b]
    if low and not cfg.allow_low_degrees:
        raise InputError(
            f"requested degrees {sorted(low)} are below the maximal generator "
            f"degree {b}; enable allow_low_degrees to override"
        )
    polys = [random_ideal_element(gens, d, rng) for d in degrees]
    polys.extend(fixed_forms)
    return PolySystem(polys)


def linear_relation_with_analysis(
    gens: PolySystem,
    degrees: Sequence[int],
    n: int,
    cfg: PipelineConfig,
    rng: np.random.Generator,
    fixed_forms: Sequence[Polynomial] = (),
) -> tuple[Relation, SquareRunAnalysis]:
    square = draw_square_system(gens, degrees, cfg, rng, fixed_forms)
    analysis = analyze_square_system(square, gens, cfg, rng)
    full_degrees = square.degrees()
    coeffs = coefficient_vector(full_degrees, len(full_degrees), n)
    relation = Relation(tuple(coeffs), analysis.equivalence, full_degrees)
    return relation, analysis


def linear_relation(
    gens: PolySystem,
    degrees: Sequence[int],
    n: int,
    cfg: PipelineConfig,
    rng: np.random.Generator,
    fixed_forms: Sequence[Polynomial] = (),
) -> Relation:
    """One relation on the Chern numbers from a random square system."""
    return linear_relation_with_analysis(gens, degrees, n, cfg, rng, fixed_forms)[0]


def _probe_hits_ideal(
    gens: PolySystem,
    square: PolySystem,
    cfg: PipelineConfig,
    rng: np.random.Generator,
) -> bool:
    """Track the probe system; does any endpoint lie on V(ideal)?"""
    patch = AffinePatch.random(square.num_vars, rng)
    results = solve_square_system(
        square, cfg.tracking, patch, rng, threads=cfg.threads, retries=cfg.path_retries
    )
    hit = False
    unresolved = 0
    for pr in results:
        if pr.status not in RESOLVED_STATUSES:
            unresolved += 1
            continue
        if relative_residuals(gens, pr.endpoint).max() < cfg.classify.residual_tol:
            hit = True
    if not hit and unresolved:
        raise TrackingError(
            f"dimension probe left {unresolved} path(s) unresolved with no hits"
        )
    return hit


def dimension_of_z(
    gens: PolySystem, cfg: PipelineConfig, rng: np.random.Generator
) -> int:
    """Dimension of the positive-dimensional component cut out by the ideal.

    Slices V(ideal) with k generic hyperplanes plus r-k random ideal elements
    of the maximal generator degree, for k = r-1 down to 1; the largest k
    whose probe still has endpoints on V(ideal) is the dimension.
    """
    r = gens.num_vars - 1
    m = gens.num_vars
    b = max(gens.degrees())
    for k in range(r - 1, -1, -1):
        polys = [random_ideal_element(gens, b, rng) for _ in range(r - k)]
        polys.extend(random_dense_form(m, 1, rng) for _ in range(k))
        square = PolySystem(polys)
        if _probe_hits_ideal(gens, square, cfg, rng):
            if k == 0:
                raise InputError(
                    "the ideal cuts out a zero-dimensional set; no positive-"
                    "dimensional component to analyze"
                )
            return k
    raise InputError("no probe endpoint lies on the ideal: its zero set looks empty")


def chern_numbers(
    gens: PolySystem,
    cfg: PipelineConfig,
    rng: np.random.Generator,
    schedule: Sequence[Sequence[int]] | None = None,
    fixed_forms: Sequence[Polynomial] = (),
) -> ChernResult:
    """Solve for the full vector [deg c_0, ..., deg c_n].

    Uses the default bump schedule starting at the maximal generator degree
    unless an explicit schedule (one degree row per relation, n+1 rows) is
    given.  The relation matrix must be unimodular; the solve is exact and
    every relation is re-verified on the integer solution.
    """
    return chern_numbers_with_analyses(gens, cfg, rng, schedule, fixed_forms)[0]


def chern_numbers_with_analyses(
    gens: PolySystem,
    cfg: PipelineConfig,
    rng: np.random.Generator,
    schedule: Sequence[Sequence[int]] | None = None,
    fixed_forms: Sequence[Polynomial] = (),
) -> tuple[ChernResult, list[SquareRunAnalysis]]:
    n = dimension_of_z(gens, cfg, rng)
    r = gens.num_vars - 1
    slots = r - len(fixed_forms)
    b = max(gens.degrees())
    if schedule is None:
        schedule = algorithm_schedule(b, slots, n)
    else:
        schedule = [tuple(int(d) for d in row) for row in schedule]
        if len(schedule) != n + 1:
            raise InputError(
                f"schedule has {len(schedule)} rows; Z has dimension {n}, "
                f"so {n + 1} relations are needed"
            )
        for row in schedule:
            if len(row) != slots:
                raise InputError(
                    f"schedule row {row} has {len(row)} degrees, expected {slots}"
                )
    relations = []
    analyses = []
    for row in schedule:
        relation, analysis = linear_relation_with_analysis(
            gens, row, n, cfg, rng, fixed_forms
        )
        relations.append(relation)
        analyses.append(analysis)
    M = [list(rel.coeffs) for rel in relations]
    rhs = [rel.rhs for rel in relations]
    det = det_integer(M)
    if det not in (-1, 1):
        raise NumericalError(
            f"relation matrix has determinant {det}; the degree schedule is "
            "not of the supported bump form"
        )
    solution = solve_integer_system(M, rhs)
    for rel in relations:
        if not rel.check(solution):
            raise NumericalError(f"relation {rel} is violated by the solution")
    result = ChernResult(
        dimension=n,
        chern_degrees=tuple(solution),
        relations=relations,
        residual_of_solve=0.0,
        det_m=det,
    )
    return result, analyses
