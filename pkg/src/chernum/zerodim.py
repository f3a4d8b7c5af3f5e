"""Endpoint post-processing: clustering, classification, multiplicities.

Endpoints of a continuation run are grouped into projective clusters, then
each cluster is classified:

* full-rank Jacobian  -> an isolated simple point of the residual scheme,
* stabilizing Macaulay nullity sequence -> an isolated point whose
  multiplicity is the stabilized truncated-dual-space dimension,
* otherwise the ideal generators arbitrate: a small membership residual means
  the point sits on the positive-dimensional component, a large one exposes a
  junk component (the input assumption is violated).

Multiplicities come from the dual-space construction: the nullity of the
Macaulay matrix whose rows are the local equations shifted by monomials and
truncated at the requested differential order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AssumptionViolationError, InputError
from ._fasteval import SystemEvaluator
from .polysys import (
    PolySystem,
    Polynomial,
    monomials_of_degree,
    normalize_point,
    projective_distance,
    relative_residuals,
)
from .tracker import HomotopyConfig, PathResult, _refine_endpoint

ON_Z = "on_Z"
ISOLATED = "isolated_S"
JUNK = "junk_positive_dimensional"
UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class ClassifyConfig:
    """Tolerances for clustering and classification.

    ``cluster_tol`` is a projective angle; ``rank_tol`` a singular-value
    ratio cutoff; membership residuals below ``residual_tol`` mean "on the
    ideal", above ``residual_tol * residual_band`` mean junk, anything in
    between is reported as unresolved.
    """

    cluster_tol: float = 1e-6
    residual_tol: float = 1e-6
    rank_tol: float = 1e-8
    macaulay_max_order: int = 10
    residual_band: float = 100.0

    def __post_init__(self):
        for name in ("cluster_tol", "residual_tol", "rank_tol"):
            if getattr(self, name) <= 0:
                raise InputError(f"{name} must be positive")
        if self.macaulay_max_order < 2:
            raise InputError("macaulay_max_order must be at least 2")


@dataclass
class EndpointCluster:
    """A deduplicated endpoint with its path indices and classification."""

    representative: np.ndarray
    path_indices: list[int]
    classification: str | None = None
    multiplicity: int | None = None
    nullity_sequence: list[int] = field(default_factory=list)


def cluster_endpoints(
    results: list[PathResult],
    tol: float,
    square_sys: PolySystem | None = None,
    cfg: HomotopyConfig | None = None,
) -> list[EndpointCluster]:
    """Greedy projective clustering of path endpoints.

    Each endpoint joins the first existing cluster within projective distance
    ``tol`` of its representative.  Representatives are the phase-aligned
    member mean, renormalized and (when the square system is provided)
    Newton-polished.
    """
    ordered = sorted(results, key=lambda pr: pr.path_index)
    reps: list[np.ndarray] = []
    members: list[list[np.ndarray]] = []
    indices: list[list[int]] = []
    for pr in ordered:
        x = pr.endpoint
        target = None
        if reps and np.all(np.isfinite(x)):
            R = np.vstack(reps)
            inner = np.abs(R.conj() @ x)
            dist = np.sqrt(np.maximum(0.0, 1.0 - np.minimum(inner, 1.0) ** 2))
            hits = np.nonzero(dist <= tol)[0]
            if hits.size:
                target = int(hits[0])
        if target is None:
            reps.append(x)
            members.append([x])
            indices.append([pr.path_index])
        else:
            members[target].append(x)
            indices[target].append(pr.path_index)

    cfg = cfg or HomotopyConfig()
    clusters = []
    for rep0, mem, idx in zip(reps, members, indices):
        if len(mem) > 1 and np.all(np.isfinite(rep0)):
            acc = np.zeros_like(rep0)
            for y in mem:
                c = np.vdot(y, rep0)
                acc += y * (c / abs(c)) if abs(c) > 0 else y
            rep = normalize_point(acc)
        else:
            rep = rep0
        if square_sys is not None and np.all(np.isfinite(rep)):
            rep, _ = _refine_endpoint(square_sys, rep, cfg)
        clusters.append(EndpointCluster(representative=rep, path_indices=list(idx)))
    return clusters


# -- local Taylor expansions ---------------------------------------------------


def _patch_basis(p: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the Hermitian complement of p."""
    u, _, _ = np.linalg.svd(p.reshape(-1, 1), full_matrices=True)
    return u[:, 1:]


def _derivative_layer(system: PolySystem, k: int):
    """Partial derivatives of order k, as {alpha: [dF_i/dx^alpha]}, cached."""
    cache = system._taylor_cache
    key = ("derivs", k)
    if key in cache:
        return cache[key]
    m = system.num_vars
    if k == 0:
        layer = {(0,) * m: list(system.polys)}
    else:
        prev = _derivative_layer(system, k - 1)
        layer = {}
        for alpha in monomials_of_degree(m, k):
            j = next(i for i, a in enumerate(alpha) if a > 0)
            down = list(alpha)
            down[j] -= 1
            layer[alpha] = [p.diff(j) for p in prev[tuple(down)]]
    cache[key] = layer
    return layer


def _layer_evaluator(system: PolySystem, k: int):
    """(alphas, evaluator) for all order-k derivatives of all polynomials."""
    cache = system._taylor_cache
    key = ("eval", k)
    if key in cache:
        return cache[key]
    layer = _derivative_layer(system, k)
    alphas = sorted(layer.keys(), reverse=True)
    polys = []
    for i in range(len(system.polys)):
        for alpha in alphas:
            polys.append(layer[alpha][i])
    ev = SystemEvaluator.from_polys(polys, system.num_vars)
    cache[key] = (alphas, ev)
    return cache[key]


def _multi_factorial(alpha) -> float:
    out = 1.0
    for a in alpha:
        out *= math.factorial(a)
    return out


def _linear_power_expansion(N: np.ndarray, alpha, q: int) -> dict:
    """Coefficients of prod_j (N[j] . y)^{alpha_j} as {beta: coeff} in q vars."""
    acc = {(0,) * q: 1.0 + 0.0j}
    for j, a in enumerate(alpha):
        for _ in range(a):
            nxt: dict = {}
            row = N[j]
            for beta, cb in acc.items():
                for l in range(q):
                    cl = row[l]
                    if cl == 0:
                        continue
                    nb = beta[:l] + (beta[l] + 1,) + beta[l + 1 :]
                    nxt[nb] = nxt.get(nb, 0.0) + cb * cl
            acc = nxt
    return acc


class _LocalModel:
    """Taylor expansions of a system in a chart centered at a point.

    Local coordinates are x = p + N y with N an orthonormal complement of p.
    Layers (homogeneous pieces of each local equation) are extended lazily as
    higher truncation degrees are requested.
    """

    def __init__(self, system: PolySystem, p: np.ndarray):
        self.system = system
        self.p = normalize_point(p)
        self.N = _patch_basis(self.p)
        self.q = system.num_vars - 1
        self.npolys = len(system.polys)
        # taylor[i] maps local exponent tuples to coefficients
        self.taylor = [dict() for _ in range(self.npolys)]
        self._built_degree = -1

    def extend(self, degree: int):
        while self._built_degree < degree:
            k = self._built_degree + 1
            alphas, ev = _layer_evaluator(self.system, k)
            vals = ev.values(self.p).reshape(self.npolys, len(alphas))
            for a_idx, alpha in enumerate(alphas):
                col = vals[:, a_idx]
                if not np.any(np.abs(col) > 0):
                    continue
                expansion = _linear_power_expansion(self.N, alpha, self.q)
                fact = _multi_factorial(alpha)
                for i in range(self.npolys):
                    t = col[i] / fact
                    if t == 0:
                        continue
                    ti = self.taylor[i]
                    for beta, cb in expansion.items():
                        ti[beta] = ti.get(beta, 0.0) + t * cb
            self._built_degree = k

    def macaulay_nullity(self, order: int, rank_tol: float) -> int:
        """Nullity of the Macaulay matrix at the given differential order."""
        if order < 1:
            raise InputError("order must be at least 1")
        if order == 1:
            return 1
        s = order - 1  # maximal total degree of the functional columns
        self.extend(s)
        cols: list[tuple] = []
        for d in range(s + 1):
            cols.extend(monomials_of_degree(self.q, d))
        col_index = {beta: i for i, beta in enumerate(cols)}
        shifts: list[tuple] = []
        for d in range(max(order - 1, 1)):
            shifts.extend(monomials_of_degree(self.q, d))
        rows = np.zeros((self.npolys * len(shifts), len(cols)), dtype=np.complex128)
        rix = 0
        for i in range(self.npolys):
            ti = self.taylor[i]
            for gamma in shifts:
                g = sum(gamma)
                for delta, cd in ti.items():
                    if sum(delta) + g > s:
                        continue
                    beta = tuple(a + b for a, b in zip(gamma, delta))
                    rows[rix, col_index[beta]] += cd
                rix += 1
        svals = np.linalg.svd(rows, compute_uv=False) if rows.size else np.zeros(1)
        smax = svals[0] if svals.size else 0.0
        if smax <= 0:
            rank = 0
        else:
            rank = int(np.sum(svals > rank_tol * smax))
        return len(cols) - rank


def macaulay_nullity(
    sys: PolySystem, p: np.ndarray, order: int, rank_tol: float = 1e-8
) -> int:
    """Dimension of the truncated dual space of the system at p.

    ``order`` counts functionals of differential order < order; the sequence
    over increasing orders is non-decreasing and stabilizes at the local
    intersection multiplicity of an isolated solution.
    """
    return _LocalModel(sys, p).macaulay_nullity(order, rank_tol)


def _jacobian_rank_full(square_sys: PolySystem, p: np.ndarray, rank_tol: float):
    J = square_sys.jacobian(p)
    svals = np.linalg.svd(J, compute_uv=False)
    r = len(square_sys.polys)
    full = svals[r - 1] > rank_tol * svals[0] if svals[0] > 0 else False
    return full


def classify_cluster(
    cluster: EndpointCluster,
    square_sys: PolySystem,
    ideal_gens: PolySystem,
    cfg: ClassifyConfig,
) -> EndpointCluster:
    """Decide on_Z / isolated_S / junk for one cluster.

    Order of tests: full-rank Jacobian (simple isolated point), then
    stabilization of the Macaulay nullity sequence (isolated point with its
    multiplicity), then the ideal-membership residual separating points of
    the positive-dimensional component from junk.  The nullity climb is
    capped by the cluster's path count: an isolated endpoint absorbs exactly
    as many paths as its multiplicity, so no stabilization below that cap
    rules out isolation.
    """
    p = cluster.representative
    if not np.all(np.isfinite(p)):
        return replace(cluster, classification=UNRESOLVED)
    if _jacobian_rank_full(square_sys, p, cfg.rank_tol):
        return replace(
            cluster, classification=ISOLATED, multiplicity=1, nullity_sequence=[1, 1]
        )
    cap = min(cfg.macaulay_max_order, max(3, len(cluster.path_indices) + 1))
    model = _LocalModel(square_sys, p)
    seq = [1]
    for order in range(2, cap + 1):
        seq.append(model.macaulay_nullity(order, cfg.rank_tol))
        if seq[-1] == seq[-2]:
            return replace(
                cluster,
                classification=ISOLATED,
                multiplicity=int(seq[-1]),
                nullity_sequence=list(seq),
            )
    rel = float(relative_residuals(ideal_gens, p).max())
    if rel < cfg.residual_tol:
        label = ON_Z
    elif rel > cfg.residual_tol * cfg.residual_band:
        label = JUNK
    else:
        label = UNRESOLVED
    return replace(cluster, classification=label, nullity_sequence=list(seq))


def total_residual_multiplicity(clusters: list[EndpointCluster]) -> int:
    """Sum of multiplicities over isolated clusters.

    Raises if any cluster is junk, unresolved or unclassified: the residual
    scheme is then not a well-defined finite set.
    """
    bad = [
        c
        for c in clusters
        if c.classification in (JUNK, UNRESOLVED, None)
    ]
    if bad:
        labels = sorted({str(c.classification) for c in bad})
        raise AssumptionViolationError(
            f"residual scheme is not finite: {len(bad)} cluster(s) classified as "
            + "/".join(labels),
            clusters=bad,
        )
    return sum(c.multiplicity for c in clusters if c.classification == ISOLATED)
