"""Reference computations used to validate the shooting solvers.

Eigenvalues come from Sturm counts on the symmetrized tridiagonal matrix
``D^{1/2} M D^{-1/2}`` (``D = diag(pi)``), which has diagonal
``(nu_{k-1} + nu_k) / pi_k`` and squared off-diagonal
``nu_k^2 / (pi_k pi_{k+1})``.  Nothing here touches the shooting code.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit
from scipy.stats import poisson

from .chain_model import BirthDeathChain, WeightedPath
from .solvers import EigenEstimate, Spectrum, default_bracket


@njit(cache=True, nogil=True)
def _sturm(diag, offsq, lam, pivmin):
    n = diag.shape[0]
    count = 0
    q = diag[0] - lam
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        count += 1
    for k in range(1, n):
        q = diag[k] - lam - offsq[k - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


def _symmetrized(path: WeightedPath):
    diag = path.diagonal()
    offsq = path.nu**2 / (path.pi[:-1] * path.pi[1:])
    pivmin = np.finfo(float).tiny * max(1.0, float(offsq.max()))
    return diag, offsq, pivmin


def sturm_count(path: WeightedPath, lam: float) -> int:
    """Number of eigenvalues strictly below ``lam``.

    The generator is positive semi-definite, so nothing lies at or
    below 0.
    """
    if lam <= 0:
        return 0
    diag, offsq, pivmin = _symmetrized(path)
    return int(_sturm(diag, offsq, float(lam), pivmin))


def oracle_spectrum(path: WeightedPath, tol: float = 1e-13) -> Spectrum:
    """All eigenvalues by bisection on the Sturm count.

    Each eigenvalue ``k >= 1`` is bracketed until ``U - L <= tol * U``.
    """
    diag, offsq, pivmin = _symmetrized(path)
    _, u0 = default_bracket(path)
    n = path.n
    vals = np.zeros(n)
    est = [EigenEstimate(0, 0.0, 0.0, 0.0, 0)]
    for k in range(1, n):
        lo, hi, it = 0.0, u0, 0
        while hi - lo > tol * hi:
            mid = lo + 0.5 * (hi - lo)
            if mid <= lo or mid >= hi:
                break
            if _sturm(diag, offsq, mid, pivmin) > k:
                hi = mid
            else:
                lo = mid
            it += 1
        vals[k] = lo + 0.5 * (hi - lo)
        est.append(EigenEstimate(k, lo, hi, vals[k], it))
    return Spectrum(vals, tuple(est), tol)


def det_A(path: WeightedPath, lam: float, i: int) -> float:
    """Leading ``i x i`` minor of the shooting matrix ``A(lam)``.

    ``A`` has diagonal ``1 + pi(l+1)/pi(l) - lam pi(l+1)/nu(l,l+1)``,
    superdiagonal 1 and subdiagonal ``pi(l+1)/pi(l)`` (1-based ``l``), so
    ``pi(xi_lam) = -pi(1) det A_{n-1}(lam)``.
    """
    pi, nu = path.pi, path.nu
    if not 0 <= i <= path.n - 1:
        raise ValueError("minor order out of range")
    prev, cur = 0.0, 1.0  # det A_{-1}, det A_0
    for l in range(1, i + 1):
        ratio = pi[l] / pi[l - 1]
        a = 1.0 + ratio - lam * pi[l] / nu[l - 1]
        prev, cur = cur, a * cur - ratio * prev
    return cur


def evolve(chain: BirthDeathChain, mu, steps: int) -> np.ndarray:
    """``mu K^steps`` by repeated dense multiplication."""
    k = chain.transition_matrix()
    out = np.asarray(mu, dtype=float).copy()
    for _ in range(int(steps)):
        out = out @ k
    return out


def evolve_continuous(chain: BirthDeathChain, mu, t: float, tail: float = 1e-13) -> np.ndarray:
    """``mu exp(-t (I - K))`` as a Poisson mixture of ``mu K^l``.

    Terms are added until the Poisson(``t``) tail mass drops below ``tail``.
    """
    k = chain.transition_matrix()
    cur = np.asarray(mu, dtype=float).copy()
    if t == 0:
        return cur
    out = np.zeros_like(cur)
    logt = math.log(t)
    l = 0
    while True:
        w = math.exp(-t + l * logt - math.lgamma(l + 1))
        out += w * cur
        if poisson.sf(l, t) < tail:
            break
        cur = cur @ k
        l += 1
    return out
