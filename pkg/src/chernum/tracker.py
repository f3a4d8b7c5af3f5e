"""Homotopy continuation for square homogeneous systems.

A square system of r forms in r+1 variables is solved by deforming a total
degree start system along H(x, t) = gamma * t * S(x) + (1 - t) * T(x) from
t = 1 down to t_min, with Euler prediction and Newton correction carried out
in an affine chart {v . x = 1} of projective space.  Paths are independent:
each one gets a deterministic retry stream derived from (seed, path index),
so outcomes do not depend on the execution schedule.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ._fasteval import SystemEvaluator, _track_loop_nb
from .errors import InputError, TrackingError
from .polysys import PolySystem, Polynomial, linear_form, normalize_point, unit_coefficients

# Below this t a path that can no longer shrink its steps is assumed to be
# approaching a singular endpoint and is truncated instead of failed.
_TERMINAL_T = 1e-4
# Patch coordinates larger than this trigger re-centering of the chart.
_REPATCH_NORM = 1e4


class PathStatus(str, enum.Enum):
    CONVERGED = "converged"
    TRUNCATED = "truncated_at_tmin"
    STEP_FAILURE = "step_failure"
    DIVERGED = "diverged_in_patch"


#: statuses that leave the endpoint usable downstream
RESOLVED_STATUSES = (PathStatus.CONVERGED, PathStatus.TRUNCATED)


@dataclass(frozen=True)
class HomotopyConfig:
    """Continuation parameters.

    ``gamma`` is the random unit-modulus factor multiplying the start system;
    leave it None to have :func:`solve_square_system` draw one from its
    generator.  ``track_tol`` is the Newton-corrector step tolerance used
    while tracking, ``newton_tol`` the endpoint refinement tolerance.
    """

    gamma: complex | None = None
    t_min: float = 1e-8
    step_initial: float = 0.05
    step_min: float = 1e-10
    step_max: float = 0.2
    track_tol: float = 1e-8
    newton_tol: float = 1e-10
    newton_max_iters: int = 30
    max_steps_per_path: int = 4000

    def __post_init__(self):
        if not 0.0 < self.t_min < 1.0:
            raise InputError("t_min must lie strictly between 0 and 1")
        if not self.step_min <= self.step_initial <= self.step_max:
            raise InputError("need step_min <= step_initial <= step_max")
        if self.gamma is not None and abs(abs(self.gamma) - 1.0) > 1e-9:
            raise InputError("gamma must have modulus 1")


@dataclass(frozen=True)
class AffinePatch:
    """The chart {x : v . x = 1} of projective space (bilinear dot product)."""

    v: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=np.complex128)
        if np.linalg.norm(v) == 0:
            raise InputError("patch vector must be non-zero")
        object.__setattr__(self, "v", v)

    @classmethod
    def random(cls, num_vars: int, rng: np.random.Generator) -> "AffinePatch":
        return cls(unit_coefficients(num_vars, rng) / math.sqrt(num_vars))

    def project(self, x: np.ndarray) -> np.ndarray:
        scale = self.v @ x
        if scale == 0:
            raise InputError("point lies on the hyperplane at infinity of the patch")
        return x / scale


@dataclass
class PathResult:
    """Endpoint and diagnostics of one tracked path."""

    endpoint: np.ndarray
    status: PathStatus
    final_t: float
    newton_residual: float
    jacobian_min_singular_value: float
    path_index: int


def total_degree_start(
    degrees: tuple[int, ...], patch: AffinePatch, rng: np.random.Generator
) -> tuple[PolySystem, list[np.ndarray]]:
    """Start system {y_i^{n_i} - y_0^{n_i}} in unitarily rotated coordinates.

    Returns the system together with all prod(n_i) start solutions expressed
    in the given patch.  Start solutions are verified to residual < 1e-12.
    """
    r = len(degrees)
    if any(n < 1 for n in degrees):
        raise InputError("all degrees must be at least 1")
    m = r + 1
    # Random unitary from the QR factorization of a complex Gaussian matrix.
    A = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    U, _ = np.linalg.qr(A)
    rows = [linear_form(U[i]) for i in range(m)]
    polys = [rows[i].power(n) - rows[0].power(n) for i, n in enumerate(degrees, start=1)]
    system = PolySystem(polys)
    # closed-form description (U, degrees) used by the compiled tracking loop
    object.__setattr__(
        system,
        "_start_structure",
        (np.ascontiguousarray(U), np.array(degrees, dtype=np.int64)),
    )

    Uh = U.conj().T
    roots = [np.exp(2j * np.pi * np.arange(n) / n) for n in degrees]
    points = []
    for flat in range(int(np.prod(degrees))):
        idx = flat
        y = np.empty(m, dtype=np.complex128)
        y[0] = 1.0
        for i in range(r - 1, -1, -1):
            idx, k = divmod(idx, degrees[i])
            y[i + 1] = roots[i][k]
        x = patch.project(Uh @ y)
        points.append(x)
    ev = system.evaluator()
    scale = 1.0 + system.coefficient_norm()
    for x in points:
        resid = np.linalg.norm(ev.values(normalize_point(x)))
        if resid > 1e-12 * scale:
            raise TrackingError(f"start solution residual {resid:.2e} too large")
    return system, points


def _pair_evaluator(start_sys: PolySystem, target_sys: PolySystem) -> SystemEvaluator:
    return SystemEvaluator.concat(start_sys.evaluator(), target_sys.evaluator())


def _homotopy_values(ev, r, x, gamma_t, one_minus_t):
    vals = ev.values(x)
    return gamma_t * vals[:r] + one_minus_t * vals[r:]


def _homotopy_values_jac(ev, r, x, gamma_t, one_minus_t):
    vals, jac = ev.values_and_jacobian(x)
    h = gamma_t * vals[:r] + one_minus_t * vals[r:]
    J = gamma_t * jac[:r] + one_minus_t * jac[r:]
    return vals, h, J


def _newton_correct(ev, r, m, x, v, t, gamma, cfg, abs_floor):
    """Newton iteration for H(., t) = 0 on the patch.

    Returns (x, ok, vals, J): the raw stacked values and the homotopy
    Jacobian from the final evaluation, which the caller can reuse for the
    next Euler prediction.
    """
    gamma_t = gamma * t
    one_minus_t = 1.0 - t
    vals = J = None
    for it in range(1, 5):
        vals, h, J = _homotopy_values_jac(ev, r, x, gamma_t, one_minus_t)
        resid = np.empty(m, dtype=np.complex128)
        resid[:r] = h
        resid[r] = v @ x - 1.0
        rnorm = np.linalg.norm(resid)
        if not np.isfinite(rnorm):
            return x, False, vals, J, it
        if rnorm <= abs_floor:
            return x, True, vals, J, it
        A = np.empty((m, m), dtype=np.complex128)
        A[:r] = J
        A[r] = v
        try:
            z = np.linalg.solve(A, -resid)
        except np.linalg.LinAlgError:
            return x, False, vals, J, it
        x = x + z
        if not np.all(np.isfinite(x)):
            return x, False, vals, J, it
        if np.linalg.norm(z) <= cfg.track_tol * max(1.0, np.linalg.norm(x)):
            return x, True, vals, J, it
    return x, False, vals, J, 4


def _refine_endpoint(target_sys: PolySystem, x, cfg):
    """Damped least-squares Newton against the target system.

    Works in the chart centered at the current point, which also handles the
    rank-deficient Jacobians of endpoints sitting on positive-dimensional
    components (the iteration then behaves like a projection).
    Returns (unit endpoint, residual norm at the unit endpoint).
    """
    ev = target_sys.evaluator()
    r = len(target_sys.polys)
    m = target_sys.num_vars
    x = normalize_point(x)
    v = x.conj()
    F = np.empty(m, dtype=np.complex128)
    A = np.empty((m, m), dtype=np.complex128)
    vals, jac = ev.values_and_jacobian(x)
    best_norm = np.linalg.norm(vals)
    floor = 1e-15 * (1.0 + target_sys.coefficient_norm())
    stalls = 0
    for _ in range(cfg.newton_max_iters):
        F[:r] = vals
        F[r] = v @ x - 1.0
        A[:r] = jac
        A[r] = v
        z = np.linalg.lstsq(A, -F, rcond=None)[0]
        lam = 1.0
        improved = False
        for _ in range(8):
            x_try = normalize_point(x + lam * z)
            vals_try, jac_try = ev.values_and_jacobian(x_try)
            n_try = np.linalg.norm(vals_try)
            if np.isfinite(n_try) and n_try < best_norm:
                # Linear-rate contraction is expected at singular endpoints;
                # barely-shrinking residuals mean the floor was hit.
                stalls = stalls + 1 if n_try > 0.7 * best_norm else 0
                x, vals, jac = x_try, vals_try, jac_try
                v = x.conj()
                best_norm = n_try
                improved = True
                break
            lam *= 0.5
        if not improved or stalls >= 2 or best_norm <= floor:
            break
    return x, float(best_norm)


def track_path(
    start_sys: PolySystem,
    target_sys: PolySystem,
    start: np.ndarray,
    cfg: HomotopyConfig,
    patch: AffinePatch,
    path_index: int = 0,
) -> PathResult:
    """Track one solution of the start system to the target system."""
    if cfg.gamma is None:
        raise InputError("track_path needs a concrete gamma in the config")
    r = len(target_sys.polys)
    m = target_sys.num_vars
    if m != r + 1 or len(start_sys.polys) != r or start_sys.num_vars != m:
        raise InputError("homotopy needs square systems of r forms in r+1 variables")

    gamma = complex(cfg.gamma)
    abs_floor = 1e-13 * (1.0 + start_sys.coefficient_norm() + target_sys.coefficient_norm())

    v = patch.v
    x = np.asarray(start, dtype=np.complex128)
    scale = v @ x
    if scale == 0:
        return _finish(target_sys, x, PathStatus.DIVERGED, 1.0, cfg, path_index)
    x = x / scale

    structure = start_sys._start_structure
    ev_t = target_sys.evaluator()
    if _track_loop_nb is not None and structure is not None and ev_t._use_numba:
        U, degs = structure
        code, t, steps, x_out, _ = _track_loop_nb(
            ev_t.E,
            ev_t.c,
            ev_t.starts,
            ev_t.maxdeg,
            U,
            degs,
            np.ascontiguousarray(x),
            np.ascontiguousarray(v),
            gamma,
            cfg.t_min,
            cfg.step_initial,
            cfg.step_min,
            cfg.step_max,
            cfg.track_tol,
            abs_floor,
            cfg.max_steps_per_path,
            _TERMINAL_T,
            _REPATCH_NORM,
        )
        if code in (0, 2):
            status = PathStatus.TRUNCATED
        elif code == 1:
            status = PathStatus.STEP_FAILURE
        elif code == 3:
            status = PathStatus.DIVERGED
        else:
            status = PathStatus.TRUNCATED if t <= _TERMINAL_T else PathStatus.STEP_FAILURE
        return _finish(target_sys, x_out, status, t, cfg, path_index)

    ev = _pair_evaluator(start_sys, target_sys)
    t = 1.0
    dt = cfg.step_initial
    steps = 0
    status = None
    hard_tail = False
    # Current homotopy values/Jacobian at (x, t); refreshed by the corrector.
    vals, _, J = _homotopy_values_jac(ev, r, x, gamma * t, 1.0 - t)
    A = np.empty((m, m), dtype=np.complex128)
    rhs = np.empty(m, dtype=np.complex128)
    while t > cfg.t_min:
        if steps >= cfg.max_steps_per_path:
            status = PathStatus.TRUNCATED if t <= _TERMINAL_T else PathStatus.STEP_FAILURE
            break
        steps += 1
        h = min(dt, t - cfg.t_min)
        if hard_tail and t > 2.0 * cfg.t_min:
            # Singular-endpoint approach: step geometrically in t so the
            # corrector stays inside its contraction region.
            h = min(h, 0.5 * t)
        # Euler predictor: solve [J_H; v] dx = [(gamma S - T) h; 0].
        A[:r] = J
        A[r] = v
        rhs[:r] = (gamma * vals[:r] - vals[r:]) * h
        rhs[r] = 0.0
        try:
            x_pred = x + np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError:
            x_pred = x
        t_new = t - h
        x_new, ok, vals_new, J_new, iters = _newton_correct(
            ev, r, m, x_pred, v, t_new, gamma, cfg, abs_floor
        )
        if ok:
            x, t = x_new, t_new
            vals, J = vals_new, J_new
            if iters <= 2:
                dt = min(dt * 2.0, cfg.step_max)
            elif iters == 3:
                dt = min(dt * 1.5, cfg.step_max)
            norm_x = np.linalg.norm(x)
            if not np.isfinite(norm_x):
                status = PathStatus.DIVERGED
                break
            if norm_x > _REPATCH_NORM:
                # Re-center the chart at the current point.
                x = x / norm_x
                v = x.conj()
                vals, _, J = _homotopy_values_jac(ev, r, x, gamma * t, 1.0 - t)
        else:
            dt *= 0.5
            if t < 0.05:
                hard_tail = True
            if dt < cfg.step_min:
                status = PathStatus.TRUNCATED if t <= _TERMINAL_T else PathStatus.STEP_FAILURE
                break
    if status is None:
        status = PathStatus.TRUNCATED
    return _finish(target_sys, x, status, t, cfg, path_index)


def _finish(target_sys, x, status, final_t, cfg, path_index) -> PathResult:
    if not np.all(np.isfinite(x)) or np.linalg.norm(x) == 0:
        endpoint = np.full(target_sys.num_vars, np.nan, dtype=np.complex128)
        return PathResult(endpoint, PathStatus.DIVERGED, final_t, np.inf, np.nan, path_index)
    endpoint, residual = _refine_endpoint(target_sys, x, cfg)
    svals = np.linalg.svd(target_sys.jacobian(endpoint), compute_uv=False)
    min_sv = float(svals[len(target_sys.polys) - 1])
    if status is PathStatus.TRUNCATED and residual <= cfg.newton_tol * (
        1.0 + target_sys.coefficient_norm()
    ):
        status = PathStatus.CONVERGED
    return PathResult(endpoint, status, final_t, residual, min_sv, path_index)


def solve_square_system(
    target: PolySystem,
    cfg: HomotopyConfig,
    patch: AffinePatch,
    rng: np.random.Generator,
    threads: int = 1,
    retries: int = 3,
) -> list[PathResult]:
    """Track all prod(n_i) paths of the total-degree homotopy to the target.

    Every start point yields exactly one PathResult, ordered by path index
    regardless of the execution schedule.  A path that fails gets up to
    ``retries`` fresh-gamma attempts from its own deterministic stream.
    """
    r = len(target.polys)
    if target.num_vars != r + 1:
        raise InputError(
            f"square system needs r forms in r+1 variables, got {r} in {target.num_vars}"
        )
    degrees = target.degrees()
    gamma = cfg.gamma
    if gamma is None:
        gamma = complex(unit_coefficients(1, rng)[0])
    start_sys, starts = total_degree_start(degrees, patch, rng)
    retry_base = int(rng.integers(0, 2**62))
    base_cfg = replace(cfg, gamma=gamma)

    def run_one(idx: int) -> PathResult:
        result = track_path(start_sys, target, starts[idx], base_cfg, patch, idx)
        attempt = 0
        while result.status not in RESOLVED_STATUSES and attempt < retries:
            attempt += 1
            sub = np.random.default_rng([retry_base, idx, attempt])
            g = complex(unit_coefficients(1, sub)[0])
            result = track_path(
                start_sys, target, starts[idx], replace(base_cfg, gamma=g), patch, idx
            )
        return result

    indices = range(len(starts))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_one, indices))
    else:
        results = [run_one(i) for i in indices]
    results.sort(key=lambda pr: pr.path_index)
    return results
