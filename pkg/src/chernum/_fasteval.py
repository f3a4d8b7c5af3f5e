"""Vectorized evaluation of polynomial systems: values and Jacobians.

One evaluator holds all terms of a system in flat arrays (exponent matrix,
coefficient vector, per-polynomial segment boundaries).  Evaluation builds a
per-variable power table and combines monomials with prefix/suffix products,
so one call costs O(T * m) for T terms in m variables.

A numba-compiled kernel is used when numba is importable; a pure-numpy path
provides the same results otherwise (set CHERNUM_PURE_NUMPY=1 to force it).
Both paths use a fixed summation order, so results are reproducible
bit-for-bit for identical inputs.
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None

_PURE_NUMPY = bool(os.environ.get("CHERNUM_PURE_NUMPY"))


def _kernel_py(E, c, starts, x, maxdeg, want_jac, out_v, out_J):
    T, m = E.shape
    k = starts.shape[0] - 1
    P = np.empty((m, maxdeg + 1), dtype=np.complex128)
    P[:, 0] = 1.0
    for d in range(1, maxdeg + 1):
        P[:, d] = P[:, d - 1] * x
    jidx = np.arange(m)
    G = P[jidx[None, :], E]  # (T, m): value of each variable power per term
    left = np.empty((T, m + 1), dtype=np.complex128)
    left[:, 0] = 1.0
    np.cumprod(G, axis=1, out=left[:, 1:])
    mono = left[:, m]
    rows = np.repeat(np.arange(k), np.diff(starts))
    cm = c * mono
    out_v[:] = np.bincount(rows, weights=cm.real, minlength=k) + 1j * np.bincount(
        rows, weights=cm.imag, minlength=k
    )
    if want_jac:
        right = np.empty((T, m), dtype=np.complex128)
        if m:
            right[:, m - 1] = 1.0
        for j in range(m - 2, -1, -1):
            right[:, j] = right[:, j + 1] * G[:, j + 1]
        D = E * P[jidx[None, :], np.maximum(E - 1, 0)]
        D[E == 0] = 0.0
        contrib = c[:, None] * D * left[:, :m] * right
        for j in range(m):
            out_J[:, j] = np.bincount(
                rows, weights=contrib[:, j].real, minlength=k
            ) + 1j * np.bincount(rows, weights=contrib[:, j].imag, minlength=k)


if njit is not None:  # pragma: no branch

    @njit(cache=True)
    def _kernel_nb(E, c, starts, x, maxdeg, want_jac, out_v, out_J):  # pragma: no cover
        m = E.shape[1]
        k = starts.shape[0] - 1
        P = np.empty((m, maxdeg + 1), dtype=np.complex128)
        for j in range(m):
            P[j, 0] = 1.0 + 0.0j
            for d in range(1, maxdeg + 1):
                P[j, d] = P[j, d - 1] * x[j]
        f = np.empty(m, dtype=np.complex128)
        left = np.empty(m + 1, dtype=np.complex128)
        if want_jac:
            for i in range(k):
                for j in range(m):
                    out_J[i, j] = 0.0
        for i in range(k):
            acc = 0.0 + 0.0j
            for t in range(starts[i], starts[i + 1]):
                for j in range(m):
                    f[j] = P[j, E[t, j]]
                left[0] = 1.0 + 0.0j
                for j in range(m):
                    left[j + 1] = left[j] * f[j]
                ct = c[t]
                acc += ct * left[m]
                if want_jac:
                    right = 1.0 + 0.0j
                    for j in range(m - 1, -1, -1):
                        e = E[t, j]
                        if e > 0:
                            out_J[i, j] += ct * e * P[j, e - 1] * left[j] * right
                        right *= f[j]
            out_v[i] = acc

else:
    _kernel_nb = None


# -- fused tracking loop -------------------------------------------------------
#
# The per-path predictor/corrector loop is compiled as one unit when numba is
# available: target values/Jacobians come from the sparse term arrays, start
# values from the closed form y_i^{n_i} - y_0^{n_i} with y = U x.  Status
# codes: 0 reached t_min, 1 step underflow (mid-path), 2 step underflow in
# the terminal zone, 3 non-finite/diverged, 4 step budget exhausted.

if njit is not None:

    @njit(cache=True)
    def _lu_solve_nb(A, b):  # pragma: no cover - compiled
        """In-place LU solve with partial pivoting; False if singular."""
        n = A.shape[0]
        for k in range(n):
            p = k
            mx = abs(A[k, k])
            for i in range(k + 1, n):
                a = abs(A[i, k])
                if a > mx:
                    mx = a
                    p = i
            if mx == 0.0 or not np.isfinite(mx):
                return False
            if p != k:
                for j in range(k, n):
                    tmp = A[k, j]
                    A[k, j] = A[p, j]
                    A[p, j] = tmp
                tmp = b[k]
                b[k] = b[p]
                b[p] = tmp
            akk = A[k, k]
            for i in range(k + 1, n):
                f = A[i, k] / akk
                if f != 0:
                    for j in range(k + 1, n):
                        A[i, j] -= f * A[k, j]
                    b[i] -= f * b[k]
        for i in range(n - 1, -1, -1):
            s = b[i]
            for j in range(i + 1, n):
                s -= A[i, j] * b[j]
            b[i] = s / A[i, i]
        return True

    @njit(cache=True)
    def _eval_homotopy_nb(E, c, starts, maxdeg, U, degs, x, valsS, valsT, jacS, jacT):  # pragma: no cover
        """Start (structured) and target (sparse) values and Jacobians at x."""
        _kernel_nb(E, c, starts, x, maxdeg, True, valsT, jacT)
        m = x.shape[0]
        r = degs.shape[0]
        y = np.empty(m, dtype=np.complex128)
        for i in range(m):
            s = 0.0 + 0.0j
            for j in range(m):
                s += U[i, j] * x[j]
            y[i] = s
        for i in range(r):
            n = degs[i]
            a = y[i + 1]
            b = y[0]
            ap = 1.0 + 0.0j
            bp = 1.0 + 0.0j
            for _ in range(n - 1):
                ap *= a
                bp *= b
            valsS[i] = ap * a - bp * b
            for j in range(m):
                jacS[i, j] = n * (ap * U[i + 1, j] - bp * U[0, j])

    @njit(cache=True)
    def _track_loop_nb(
        E,
        c,
        starts,
        maxdeg,
        U,
        degs,
        x0,
        v0,
        gamma,
        t_min,
        step_init,
        step_min,
        step_max,
        track_tol,
        abs_floor,
        max_steps,
        terminal_t,
        repatch_norm,
    ):  # pragma: no cover - compiled
        r = degs.shape[0]
        m = r + 1
        x = x0.copy()
        v = v0.copy()
        valsS = np.empty(r, dtype=np.complex128)
        valsT = np.empty(r, dtype=np.complex128)
        jacS = np.empty((r, m), dtype=np.complex128)
        jacT = np.empty((r, m), dtype=np.complex128)
        nvalsS = np.empty(r, dtype=np.complex128)
        nvalsT = np.empty(r, dtype=np.complex128)
        njacS = np.empty((r, m), dtype=np.complex128)
        njacT = np.empty((r, m), dtype=np.complex128)
        A = np.empty((m, m), dtype=np.complex128)
        rhs = np.empty(m, dtype=np.complex128)
        xp = np.empty(m, dtype=np.complex128)
        _eval_homotopy_nb(E, c, starts, maxdeg, U, degs, x, valsS, valsT, jacS, jacT)
        t = 1.0
        dt = step_init
        steps = 0
        status = 0
        hard_tail = False
        while t > t_min:
            if steps >= max_steps:
                status = 4
                break
            steps += 1
            h = dt
            if h > t - t_min:
                h = t - t_min
            if hard_tail and t > 2.0 * t_min and h > 0.5 * t:
                # Singular-endpoint approach: step geometrically in t so the
                # corrector stays inside its contraction region.
                h = 0.5 * t
            gt = gamma * t
            omt = 1.0 - t
            for i in range(r):
                rhs[i] = (gamma * valsS[i] - valsT[i]) * h
                for j in range(m):
                    A[i, j] = gt * jacS[i, j] + omt * jacT[i, j]
            rhs[m - 1] = 0.0
            for j in range(m):
                A[m - 1, j] = v[j]
            if _lu_solve_nb(A, rhs):
                for j in range(m):
                    xp[j] = x[j] + rhs[j]
            else:
                for j in range(m):
                    xp[j] = x[j]
            t_new = t - h
            gt2 = gamma * t_new
            omt2 = 1.0 - t_new
            ok = False
            iters = 0
            for _ in range(4):
                iters += 1
                _eval_homotopy_nb(
                    E, c, starts, maxdeg, U, degs, xp, nvalsS, nvalsT, njacS, njacT
                )
                rn2 = 0.0
                for i in range(r):
                    hv = gt2 * nvalsS[i] + omt2 * nvalsT[i]
                    rhs[i] = -hv
                    rn2 += hv.real * hv.real + hv.imag * hv.imag
                pe = 0.0 + 0.0j
                for j in range(m):
                    pe += v[j] * xp[j]
                pe -= 1.0
                rhs[m - 1] = -pe
                rn2 += pe.real * pe.real + pe.imag * pe.imag
                if not np.isfinite(rn2):
                    break
                if rn2 <= abs_floor * abs_floor:
                    ok = True
                    break
                for i in range(r):
                    for j in range(m):
                        A[i, j] = gt2 * njacS[i, j] + omt2 * njacT[i, j]
                for j in range(m):
                    A[m - 1, j] = v[j]
                if not _lu_solve_nb(A, rhs):
                    break
                zn2 = 0.0
                xn2 = 0.0
                finite = True
                for j in range(m):
                    xp[j] = xp[j] + rhs[j]
                    zn2 += rhs[j].real * rhs[j].real + rhs[j].imag * rhs[j].imag
                    xn2 += xp[j].real * xp[j].real + xp[j].imag * xp[j].imag
                    if not (np.isfinite(xp[j].real) and np.isfinite(xp[j].imag)):
                        finite = False
                if not finite:
                    break
                lim = track_tol * max(1.0, np.sqrt(xn2))
                if zn2 <= lim * lim:
                    ok = True
                    break
            if ok:
                for j in range(m):
                    x[j] = xp[j]
                t = t_new
                tmp = valsS
                valsS = nvalsS
                nvalsS = tmp
                tmp = valsT
                valsT = nvalsT
                nvalsT = tmp
                tmpJ = jacS
                jacS = njacS
                njacS = tmpJ
                tmpJ = jacT
                jacT = njacT
                njacT = tmpJ
                if iters <= 2:
                    dt = min(dt * 2.0, step_max)
                elif iters == 3:
                    dt = min(dt * 1.5, step_max)
                xn = 0.0
                for j in range(m):
                    xn += x[j].real * x[j].real + x[j].imag * x[j].imag
                xn = np.sqrt(xn)
                if not np.isfinite(xn) or xn == 0.0:
                    status = 3
                    break
                if xn > repatch_norm:
                    for j in range(m):
                        x[j] = x[j] / xn
                        v[j] = np.conj(x[j])
                    _eval_homotopy_nb(
                        E, c, starts, maxdeg, U, degs, x, valsS, valsT, jacS, jacT
                    )
            else:
                dt *= 0.5
                if t < 0.05:
                    hard_tail = True
                if dt < step_min:
                    status = 2 if t <= terminal_t else 1
                    break
        return status, t, steps, x, v

else:
    _lu_solve_nb = None
    _eval_homotopy_nb = None
    _track_loop_nb = None


class SystemEvaluator:
    """Flat-array evaluator for a list of polynomials."""

    __slots__ = ("E", "c", "starts", "num_polys", "num_vars", "maxdeg", "_use_numba")

    def __init__(self, E, c, starts, num_vars, use_numba=None):
        self.E = np.ascontiguousarray(E, dtype=np.int64)
        self.c = np.ascontiguousarray(c, dtype=np.complex128)
        self.starts = np.ascontiguousarray(starts, dtype=np.int64)
        self.num_polys = len(starts) - 1
        self.num_vars = num_vars
        self.maxdeg = int(self.E.max()) if self.E.size else 0
        if use_numba is None:
            use_numba = _kernel_nb is not None and not _PURE_NUMPY
        self._use_numba = bool(use_numba and _kernel_nb is not None)

    @classmethod
    def from_polys(cls, polys, num_vars, use_numba=None):
        """Build from polynomials; zero polynomials yield empty segments."""
        exps = []
        coeffs = []
        starts = [0]
        for p in polys:
            for e, coeff in p.sorted_terms():
                exps.append(e)
                coeffs.append(coeff)
            starts.append(len(exps))
        E = np.array(exps, dtype=np.int64).reshape(len(exps), num_vars)
        c = np.array(coeffs, dtype=np.complex128)
        return cls(E, c, np.array(starts), num_vars, use_numba=use_numba)

    @classmethod
    def concat(cls, a: "SystemEvaluator", b: "SystemEvaluator") -> "SystemEvaluator":
        if a.num_vars != b.num_vars:
            raise ValueError("evaluators have different variable counts")
        E = np.vstack([a.E, b.E])
        c = np.concatenate([a.c, b.c])
        starts = np.concatenate([a.starts, b.starts[1:] + a.starts[-1]])
        return cls(E, c, starts, a.num_vars, use_numba=a._use_numba)

    def values(self, x) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=np.complex128)
        out_v = np.empty(self.num_polys, dtype=np.complex128)
        out_J = np.empty((self.num_polys, 0), dtype=np.complex128)
        kernel = _kernel_nb if self._use_numba else _kernel_py
        kernel(self.E, self.c, self.starts, x, self.maxdeg, False, out_v, out_J)
        return out_v

    def values_and_jacobian(self, x):
        x = np.ascontiguousarray(x, dtype=np.complex128)
        out_v = np.empty(self.num_polys, dtype=np.complex128)
        out_J = np.empty((self.num_polys, self.num_vars), dtype=np.complex128)
        kernel = _kernel_nb if self._use_numba else _kernel_py
        kernel(self.E, self.c, self.starts, x, self.maxdeg, True, out_v, out_J)
        return out_v, out_J
