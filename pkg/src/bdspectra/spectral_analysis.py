"""Diagnostics computed from a converged spectrum.

* eigenvectors glued from the forward and backward profiles;
* ``alpha_j``: nonzero eigenvalues of the path with its last vertex removed
  (where the type of ``xi_lam`` steps up);
* ``beta_j``: the roots of ``u(lam) = pi(xi_lam) - xi_lam(n)`` other than 0,
  which are the fixed points of ``L(lam) = E(xi_lam)/Var(xi_lam)`` besides
  the eigenvalues;
* partial-fraction forms of ``L``, the curvature ``D_i`` of ``L`` at
  eigenvalues, the boundary products ``zeta_i(1) zeta_i(n)``;
* separation distance from an endpoint of a birth-and-death chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .chain_model import BirthDeathChain, WeightedPath, from_birth_death, principal_subpath
from .shooting import shoot, shoot_reverse
from .solvers import Spectrum, full_spectrum

BETA_MARGINS = (1e-9, 1e-11, 1e-13, 1e-15, 0.0)
MARGIN = 1e-9


@dataclass(frozen=True)
class Eigenvector:
    """``values`` has unit norm in ``L^2(pi)`` and a negative first entry."""

    index: int
    eigenvalue: float
    values: np.ndarray
    residual: float


@dataclass(frozen=True)
class AnalysisReport:
    spectrum: Spectrum
    alphas: np.ndarray
    betas: np.ndarray
    curvature: np.ndarray
    boundary_values: np.ndarray


def _row_residual(path: WeightedPath, lam: float, z: np.ndarray) -> np.ndarray:
    d = np.diff(z)
    flux = np.zeros(path.n)
    flux[1:] += path.nu * d
    flux[:-1] -= path.nu * d
    return lam * path.pi * z - flux


def _glue(path: WeightedPath, lam: float) -> np.ndarray:
    # forward and backward profiles are both multiples of the eigenvector;
    # each is accurate from its own end until the other solution of the
    # recursion takes over.  Take the forward part up to vertex k and the
    # rescaled backward part after it, with k minimizing the one row
    # residual the junction introduces (relative to the glued norm).
    pi, nu = path.pi, path.nu
    f = shoot(path, lam).values
    g = shoot_reverse(path, lam).values
    n = f.size
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        c = f / g
        head = np.cumsum(pi * f * f)
        tail = np.concatenate((np.cumsum((pi * g * g)[::-1])[::-1][1:], [0.0]))
        norm2 = head + c * c * tail
        res = lam * pi * f
        res[1:] -= nu * (f[1:] - f[:-1])
        nxt = np.concatenate((c[:-1] * g[1:], [0.0]))
        res[:-1] -= nu * (f[:-1] - nxt[:-1])
        score = np.abs(res) / np.sqrt(norm2)
    score[~np.isfinite(score)] = np.inf
    score[-1] = min(score[-1], np.abs(res[-1]) / math.sqrt(head[-1]))
    k = int(np.argmin(score))
    if k == n - 1:
        return f
    return np.concatenate((f[: k + 1], c[k] * g[k + 1 :]))


def eigenvector(path: WeightedPath, lambda_i: float, index: int | None = None) -> Eigenvector:
    """Normalized shooting profile at an eigenvalue.

    The forward profile is used up to a junction vertex and the matching
    multiple of the backward profile after it; the junction minimizes the
    row residual there, which keeps either profile from being used where
    rounding in ``lambda_i`` has been amplified.  The residual is the
    largest entry of ``lam pi zeta - (row of the Dirichlet form)``; it is
    rejected when above ``1e-6 * lam * max pi|zeta|``.  ``lambda_i = 0``
    returns the constant vector.
    """
    if lambda_i == 0:
        return Eigenvector(0, 0.0, np.ones(path.n), 0.0)
    v = _glue(path, float(lambda_i))
    v = v / np.max(np.abs(v))
    z = v / math.sqrt(math.fsum(path.pi * v**2))
    res = float(np.max(np.abs(_row_residual(path, lambda_i, z))))
    scale = lambda_i * float(np.max(path.pi * np.abs(z)))
    if res > 1e-6 * scale:
        raise ValueError(f"eigenvalue estimate too loose (residual {res:.3g})")
    if index is None:
        index = int(np.count_nonzero(z[1:] * z[:-1] < 0) + np.count_nonzero(z[1:-1] == 0))
    return Eigenvector(int(index), float(lambda_i), z, res)


def alphas(path: WeightedPath, spectrum_fn=full_spectrum) -> np.ndarray:
    """Nonzero eigenvalues of the leading ``n-1`` vertices (``n >= 3``)."""
    if path.n < 3:
        return np.zeros(0)
    return spectrum_fn(principal_subpath(path, path.n - 1)).eigenvalues[1:].copy()


def _u(path: WeightedPath, lam: float) -> float:
    _, _, t, _, x, _ = K.shoot_summary(path.pi, path.nu, lam)
    return t - x


def _window_end(path, lam_end, width, direction, want):
    # step inside the window from an eigenvalue until u shows the sign the
    # interlacing predicts there; a root hugging the eigenvalue needs a tiny step
    for d in BETA_MARGINS:
        x = lam_end + direction * max(d * width, 4.0 * np.spacing(lam_end))
        if _u(path, x) * want > 0:
            return x
    return None


def _converged(spectrum: Spectrum, i: int) -> bool:
    e = spectrum.estimates[i]
    return e.upper - e.lower <= 1e-12 * e.upper


def beta_roots(path: WeightedPath, spectrum: Spectrum) -> np.ndarray:
    """Roots ``beta_1 < ... < beta_{n-2}`` of ``pi(xi_lam) - xi_lam(n)``.

    Root ``i`` is bisected inside ``(lam_i, lam_{i+1})`` to ``1e-12
    lam_{i+1}``.  The ends are moved inside by ``1e-9`` of the window
    width, or by less when a root sits closer to an eigenvalue than that,
    until the sign of ``u`` is ``(-1)^i`` at the left end and
    ``(-1)^(i+1)`` at the right end.  With a localized eigenvector the root
    can lie within rounding of an eigenvalue, so no double shows the
    predicted sign at that end; the root is then returned as the nearest
    double inside the window, provided that eigenvalue is converged.
    """
    lam = spectrum.eigenvalues
    n = path.n
    out = np.empty(max(n - 2, 0))
    for i in range(1, n - 1):
        width = lam[i + 1] - lam[i]
        want = -1.0 if i % 2 else 1.0
        lo = _window_end(path, lam[i], width, 1.0, want)
        hi = _window_end(path, lam[i + 1], width, -1.0, -want)
        if lo is not None and hi is None and _converged(spectrum, i + 1):
            out[i - 1] = np.nextafter(lam[i + 1], 0.0)
            continue
        if hi is not None and lo is None and _converged(spectrum, i):
            out[i - 1] = np.nextafter(lam[i], np.inf)
            continue
        if lo is None or hi is None or not lo < hi:
            raise ValueError(f"sign test failed in window {i}; spectrum not converged?")
        tol = 1e-12 * lam[i + 1]
        while hi - lo > tol:
            mid = lo + 0.5 * (hi - lo)
            if mid <= lo or mid >= hi:
                break
            if _u(path, mid) * want > 0:
                lo = mid
            else:
                hi = mid
        out[i - 1] = lo + 0.5 * (hi - lo)
    return out


def curvature(spectrum: Spectrum, betas) -> np.ndarray:
    """``D_i = sum_j 1/(beta_j - lam_i) - sum_{j != i} 1/(lam_j - lam_i)``
    for ``i = 1..n-1`` (half the second derivative of ``L`` at ``lam_i``)."""
    lam = np.asarray(spectrum.eigenvalues[1:], dtype=float)
    b = np.asarray(betas, dtype=float)
    out = np.empty(lam.size)
    for i, li in enumerate(lam):
        db = b - li
        dl = np.delete(lam, i) - li
        if np.any(db == 0) or np.any(dl == 0):
            raise ValueError("coincident spectral points")
        out[i] = math.fsum(1.0 / db) - math.fsum(1.0 / dl)
    return out


def _check_margin(lam, pts, what):
    pts = np.asarray(pts, dtype=float)
    if pts.size and np.any(np.abs(pts - lam) <= MARGIN * np.maximum(np.abs(pts), abs(lam))):
        raise ValueError(f"lambda is too close to one of the {what}")


def L_spectral(spectrum: Spectrum, betas, lam: float) -> float:
    """``L(lam)`` from ``1/(L - lam) = sum 1/(lam_j - lam) - sum 1/(beta_j - lam)``."""
    ev = np.asarray(spectrum.eigenvalues[1:], dtype=float)
    b = np.asarray(betas, dtype=float)
    _check_margin(lam, ev, "eigenvalues")
    _check_margin(lam, b, "beta roots")
    s = math.fsum(1.0 / (ev - lam)) - math.fsum(1.0 / (b - lam))
    return lam + 1.0 / s


def rho0(spectrum: Spectrum, lam: float) -> float:
    ev = np.asarray(spectrum.eigenvalues[1:], dtype=float)
    return -float(np.prod((ev - lam) / ev))


def rho(spectrum: Spectrum, boundary_data, lam: float, i: int) -> float:
    """``pi(xi_lam zeta_i)`` from the spectrum and ``zeta_i(n)``.

    ``boundary_data[j]`` is ``zeta_j(n)`` (``boundary_data[0] = 1``).
    """
    r0 = rho0(spectrum, lam)
    if i == 0:
        return r0
    li = spectrum.eigenvalues[i]
    _check_margin(lam, [li], "eigenvalues")
    return lam * float(boundary_data[i]) / (lam - li) * r0


def boundary_product(spectrum: Spectrum, i: int) -> float:
    """``zeta_i(1) zeta_i(n) = -prod_{j != i} lam_j / (lam_j - lam_i)``."""
    ev = np.asarray(spectrum.eigenvalues[1:], dtype=float)
    if not 1 <= i <= ev.size:
        raise ValueError("index out of range")
    li = ev[i - 1]
    rest = np.delete(ev, i - 1)
    return -float(np.prod(rest / (rest - li)))


def analyze(path: WeightedPath, spectrum: Spectrum | None = None) -> AnalysisReport:
    if spectrum is None:
        spectrum = full_spectrum(path)
    betas = beta_roots(path, spectrum)
    zn = np.ones(path.n)
    for i in range(1, path.n):
        zn[i] = eigenvector(path, spectrum.eigenvalues[i], i).values[-1]
    return AnalysisReport(spectrum, alphas(path), betas, curvature(spectrum, betas), zn)


def separation_coefficients(eigs) -> np.ndarray:
    """``c_j = prod_{i != j} lam_i / (lam_i - lam_j)`` over nonzero eigenvalues."""
    lam = np.asarray(eigs, dtype=float)
    out = np.empty(lam.size)
    for j in range(lam.size):
        rest = np.delete(lam, j)
        out[j] = float(np.prod(rest / (rest - lam[j])))
    return out


def chain_spectrum(chain: BirthDeathChain) -> np.ndarray:
    """Eigenvalues of ``I - K`` to near machine precision."""
    return full_spectrum(from_birth_death(chain), tol=0.0, rel_tol=1e-16).eigenvalues


def separation(chain: BirthDeathChain, time: float, mode: str = "discrete") -> float:
    """Separation distance at ``time`` for the chain started at an endpoint:
    ``sum_j c_j (1 - lam_j)^m`` (discrete) or ``sum_j c_j exp(-lam_j t)``.

    The discrete form needs ``p_i + q_{i+1} <= 1`` on every edge.
    """
    if mode not in ("discrete", "continuous"):
        raise ValueError("mode must be 'discrete' or 'continuous'")
    if time < 0:
        raise ValueError("time must be non-negative")
    if mode == "discrete":
        if int(time) != time:
            raise ValueError("discrete time must be an integer")
        if not chain.is_monotone():
            raise ValueError("discrete formula needs p_i + q_{i+1} <= 1")
    lam = chain_spectrum(chain)[1:]
    c = separation_coefficients(lam)
    if mode == "discrete":
        return math.fsum(c * (1.0 - lam) ** int(time))
    return math.fsum(c * np.exp(-lam * time))


def separation_monotone_check(chain: BirthDeathChain, mu, horizon: int, rtol: float = 1e-12) -> bool:
    """Whether ``mu K^m / pi`` stays non-decreasing for ``m = 0..horizon``
    (up to ``rtol`` times its largest entry)."""
    pi = from_birth_death(chain).pi
    k = chain.transition_matrix()
    cur = np.asarray(mu, dtype=float).copy()
    if cur.shape != pi.shape or np.any(cur < 0) or abs(math.fsum(cur) - 1) > 1e-12:
        raise ValueError("mu must be a distribution on the chain's states")
    for _ in range(int(horizon) + 1):
        r = cur / pi
        if np.any(np.diff(r) < -rtol * np.max(np.abs(r))):
            return False
        cur = cur @ k
    return True
