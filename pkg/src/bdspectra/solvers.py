"""Eigenvalue solvers built on shooting profiles.

* :func:`solve_gap_a1` iterates the Rayleigh quotient of the clipped
  profile; the sequence decreases to the spectral gap.
* :func:`solve_gap_a2` bisects on the sign of ``pi(phi_lam)`` for the
  clipped profile, which is the sign of ``lam - gap``.
* :func:`solve_eigen_di` bisects for the ``i``-th eigenvalue using the type
  of ``xi_lam`` and, at matching type, the sign of ``pi(xi_lam)``.

Dichotomies stop once ``U - L <= max(tol, rel_tol * U)``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .chain_model import WeightedPath
from .shooting import _classify_signs, shoot, shoot_clipped, shoot_reverse

TOL_ABS = 1e-14
TOL_REL = 1e-12
STEP_TOL = 1e-13
MAX_BISECT = 2200
MAX_ITER = 10_000


@dataclass(frozen=True)
class EigenEstimate:
    """Bracket ``[lower, upper]`` around eigenvalue number ``index``.

    For dichotomies ``history`` has one row ``(L_l, U_l)`` per iteration,
    starting with the initial bracket.  For fixed-point iterations it is
    the sequence of iterates.
    """

    index: int
    lower: float
    upper: float
    estimate: float
    iterations: int
    history: np.ndarray | None = None


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    estimates: tuple
    tol: float

    @property
    def n(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def gap(self) -> float:
        return float(self.eigenvalues[1])


@dataclass(frozen=True)
class LTrace:
    """Iterates of ``lam -> L^(i)(lam)`` and the summary value ``lam_star``."""

    index: int
    trace: np.ndarray
    lam_star: float
    converged: bool


def default_bracket(path: WeightedPath) -> tuple[float, float]:
    """``(0, 2 max_k (nu_{k-1} + nu_k) / pi_k)``.

    The upper end is the Gershgorin bound on the generator; it is attained
    by the top eigenvalue of bipartite-symmetric paths, so it is treated as
    a closed end.
    """
    return 0.0, 2.0 * float(path.diagonal().max())


def _tails(pi: np.ndarray) -> np.ndarray:
    t = np.zeros(pi.size)
    t[:-1] = np.cumsum(pi[::-1])[::-1][1:]
    return t


def _bracket_args(path, lower, upper):
    l0, u0 = default_bracket(path)
    lower = l0 if lower is None else float(lower)
    upper = u0 if upper is None else float(upper)
    if not (0 <= lower < upper) or not np.isfinite(upper):
        raise ValueError("need 0 <= L0 < U0")
    return lower, upper


def _estimate(idx, hist, it) -> EigenEstimate:
    h = np.column_stack((hist[0][: it + 1], hist[1][: it + 1]))
    lo, hi = h[-1]
    return EigenEstimate(idx, float(lo), float(hi), float(lo + 0.5 * (hi - lo)), int(it), h)


def solve_gap_a2(path: WeightedPath, lower=None, upper=None, tol=TOL_ABS, rel_tol=TOL_REL, max_iter=MAX_BISECT) -> EigenEstimate:
    """Spectral gap by bisection on the sign of the clipped profile's mean."""
    lower, upper = _bracket_args(path, lower, upper)
    if not (tol > 0 or rel_tol > 0):
        raise ValueError("some tolerance must be positive")
    tail = _tails(path.pi)
    if lower > 0 and K.clipped_mean_sign(path.pi, path.nu, tail, lower) > 0:
        raise ValueError("the gap lies below the lower end of the bracket")
    if K.clipped_mean_sign(path.pi, path.nu, tail, upper) < 0:
        raise ValueError("the gap lies above the upper end of the bracket")
    hl = np.empty(max_iter + 1)
    hu = np.empty(max_iter + 1)
    it = K.dichotomy_gap(path.pi, path.nu, tail, lower, upper, float(tol), float(rel_tol), int(max_iter), hl, hu)
    return _estimate(1, (hl, hu), it)


def solve_eigen_di(path: WeightedPath, i: int, lower=None, upper=None, tol=TOL_ABS, rel_tol=TOL_REL, max_iter=MAX_BISECT) -> EigenEstimate:
    """Eigenvalue number ``i`` (``1 <= i <= n-1``) by type-driven bisection.

    At a midpoint ``lam`` with ``xi_lam`` of type ``j``: ``j > i`` moves the
    upper end, ``j < i`` the lower end, and ``j = i`` decides on the sign
    of ``(-1)^(i-1) pi(xi_lam)`` (positive means ``lam`` is above).  A mean
    that vanishes to rounding collapses the bracket onto ``lam``.  This
    branch is sometimes stated as ``pi(xi) > 0``, which would duplicate the
    previous case, so ``= 0`` is used.
    """
    if int(i) != i or not 1 <= i <= path.n - 1:
        raise ValueError(f"index must lie in 1..{path.n - 1}")
    lower, upper = _bracket_args(path, lower, upper)
    hl = np.empty(max_iter + 1)
    hu = np.empty(max_iter + 1)
    it = K.dichotomy_di(path.pi, path.nu, int(i), lower, upper, float(tol), float(rel_tol), int(max_iter), hl, hu)
    return _estimate(int(i), (hl, hu), it)


def full_spectrum(path: WeightedPath, tol=TOL_ABS, rel_tol=TOL_REL, jobs: int = 1, warm_start: bool = False) -> Spectrum:
    """All eigenvalues, each from its own dichotomy on the default bracket.

    The indices are independent, so ``jobs > 1`` runs them on a thread pool
    (the kernels release the GIL).  ``warm_start`` instead runs them in
    order, starting each lower end at the previous eigenvalue's lower end.
    """
    n = path.n
    _, u0 = default_bracket(path)
    est: list[EigenEstimate | None] = [None] * n
    est[0] = EigenEstimate(0, 0.0, 0.0, 0.0, 0)
    if warm_start:
        lo = 0.0
        for i in range(1, n):
            est[i] = solve_eigen_di(path, i, lo, u0, tol, rel_tol)
            lo = est[i].lower
    else:
        run = lambda i: solve_eigen_di(path, i, 0.0, u0, tol, rel_tol)  # noqa: E731
        if jobs == 1 or n < 64:
            for i in range(1, n):
                est[i] = run(i)
        else:
            workers = jobs if jobs > 0 else (os.cpu_count() or 1)
            with ThreadPoolExecutor(max_workers=workers) as ex:
                for i, e in zip(range(1, n), ex.map(run, range(1, n))):
                    est[i] = e
    vals = np.array([e.estimate for e in est])
    vals[0] = 0.0
    return Spectrum(vals, tuple(est), max(tol, rel_tol * u0))


def solve_gap_a1(path: WeightedPath, lambda0: float, start_value: float = 1.0, tol: float = STEP_TOL, max_iter: int = MAX_ITER) -> EigenEstimate:
    """Spectral gap by iterating ``lam <- E(psi)/Var(psi)``, where ``psi`` is
    the clipped profile at ``lam`` started from ``-start_value``.

    Every iterate after the first is an upper bound for the gap.  The loop
    ends when a step is at most ``tol * lam`` or stops decreasing; the
    non-decreasing final iterate is not recorded.  ``lower`` is the
    closed-form lower bound from :func:`bdspectra.bounds.gap_lower_bound`.
    """
    from .bounds import gap_lower_bound

    if not lambda0 > 0 or not start_value > 0 or not tol > 0:
        raise ValueError("lambda0, start_value and tol must be positive")
    lam = float(lambda0)
    trace = [lam]
    lam = shoot_clipped(path, lam, 1, -start_value).rayleigh
    trace.append(lam)
    for _ in range(max_iter - 1):
        new = shoot_clipped(path, lam, 1, -start_value).rayleigh
        if new >= lam:
            break
        trace.append(new)
        if lam - new <= tol * lam:
            lam = new
            break
        lam = new
    lb = min(gap_lower_bound(path), lam)
    return EigenEstimate(1, lb, lam, lam, len(trace) - 1, np.array(trace))


def iterate_L(path: WeightedPath, i: int, lambda0: float, max_iter: int = MAX_ITER, tol: float = STEP_TOL) -> LTrace:
    """Iterate ``lam <- E/Var`` of the profile clipped after its ``i``-th run.

    ``lam_star`` is the limit when the iteration settles (relative step at
    most ``tol``) and otherwise the largest interior local minimum of the
    trace (the last iterate when there is none).  Started above eigenvalue
    ``i`` it never exceeds that eigenvalue.
    """
    if int(i) != i or not 1 <= i <= path.n - 1:
        raise ValueError(f"index must lie in 1..{path.n - 1}")
    if not lambda0 > 0:
        raise ValueError("lambda0 must be positive")
    lam = float(lambda0)
    trace = [lam]
    converged = False
    for _ in range(max_iter):
        new = shoot_clipped(path, lam, int(i), -1.0).rayleigh
        trace.append(new)
        if abs(lam - new) <= tol * lam:
            converged = True
            lam = new
            break
        lam = new
    t = np.array(trace)
    if converged:
        star = float(t[-1])
    else:
        mins = [t[l] for l in range(1, t.size - 1) if t[l - 1] > t[l] < t[l + 1]]
        star = float(max(mins)) if mins else float(t[-1])
    return LTrace(int(i), t, star, converged)


def _restricted_type(signs: np.ndarray) -> int:
    if signs.size == 0:
        return 1
    return _classify_signs(signs).type_index


def locate_with_two_sided(path: WeightedPath, lam: float, split: int) -> tuple[int, int]:
    """Rank bracket ``(lo, hi)`` with ``lambda_lo < lam < lambda_hi``.

    ``i`` is the type of the forward profile on vertices ``1..split`` and
    ``j`` the type of the backward profile on ``split..n`` (read from
    ``n`` down).  With ``f = (-1)^i xi(split)`` and ``b = (-1)^j xi~(split)``:
    ``f, b > 0`` gives ``(i+j-2, i+j-1)``, ``f, b < 0`` gives
    ``(i+j-1, i+j+1)`` and mixed signs give ``(i+j-2, i+j)``.  A single
    vertex counts as type 1.  ``hi = n`` stands for ``+inf``.
    """
    n = path.n
    if int(split) != split or not 1 <= split <= n:
        raise ValueError(f"split must lie in 1..{n}")
    fwd = shoot(path, lam)
    bwd = shoot_reverse(path, lam)
    k = int(split) - 1
    i = _restricted_type(fwd.increment_signs[:k])
    j = _restricted_type(bwd.increment_signs[k:][::-1])
    f = (-1) ** i * fwd.values[k]
    b = (-1) ** j * bwd.values[k]
    if f == 0 or b == 0:
        raise ValueError("a profile vanishes at the split vertex")
    if f > 0 and b > 0:
        lo, hi = i + j - 2, i + j - 1
    elif f < 0 and b < 0:
        lo, hi = i + j - 1, i + j + 1
    else:
        lo, hi = i + j - 2, i + j
    return max(lo, 0), min(hi, n)
