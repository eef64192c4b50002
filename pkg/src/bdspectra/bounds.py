"""Closed-form bounds on the spectral gap.

Bottleneck paths live on ``{0..n}`` with uniform ``pi`` and conductance
``1/(n+1)`` except ``eps_j/(n+1)`` on the edges ``{x_j - 1, x_j}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .chain_model import WeightedPath

USE_EPS_OVER_X = "use eps/x"


@dataclass(frozen=True)
class GapBracket:
    lower: float
    upper: float
    method: str

    def __post_init__(self):
        if not 0 < self.lower <= self.upper:
            raise ValueError(f"invalid bracket [{self.lower}, {self.upper}]")

    def __contains__(self, x: float) -> bool:
        return self.lower <= x <= self.upper


def _flow_sums(path: WeightedPath) -> tuple[np.ndarray, np.ndarray]:
    """``left[i] = sum_{j<i} pi[0..j]/nu(j,j+1)`` and
    ``right[i] = sum_{j>i} pi[j..end]/nu(j-1,j)``."""
    pi, nu = path.pi, path.nu
    head = np.cumsum(pi)[:-1]
    tail = np.cumsum(pi[::-1])[::-1][1:]
    left = np.concatenate(([0.0], np.cumsum(head / nu)))
    right = np.concatenate((np.cumsum((tail / nu)[::-1])[::-1], [0.0]))
    return left, right


def gap_lower_bound(path: WeightedPath) -> float:
    """``max_i min(1/left_i, 1/right_i)``: a lower bound on the gap that is
    within a factor 4 of it."""
    left, right = _flow_sums(path)
    with np.errstate(divide="ignore"):
        m = np.minimum(1.0 / left, 1.0 / right)
    return float(m.max())


def gap_lower_bound_additive(path: WeightedPath) -> float:
    """``max_i 1/(left_i + right_i)``; at most the max-min form and at least
    half of it."""
    left, right = _flow_sums(path)
    return float((1.0 / (left + right)).max())


def eta(a: float, k: int, l: int) -> float:
    """Power sum ``sum_{i=k}^{l} i^a``."""
    if k < 1 or l < k:
        raise ValueError("need 1 <= k <= l")
    return math.fsum(np.arange(k, l + 1, dtype=float) ** a)


def metropolis_gap_bounds(n: int, a: float, variant: str = "check") -> GapBracket:
    """Gap bracket for the Metropolis chains on ``{-n..n}``."""
    if n < 1 or not a > 0:
        raise ValueError("need n >= 1 and a > 0")
    if variant == "check":
        p = eta(-a, 1, n) * eta(a, 2, n + 1)
        return GapBracket(1.0 / (8.0 * p), 2.0 / p, "metropolis-check")
    if variant == "hat":
        c = -(-n // 2)
        p = eta(a, 1, c) * eta(-a, c, n)
        return GapBracket(1.0 / (64.0 * p), 1.0 / (2.0 * p), "metropolis-hat")
    raise ValueError("variant must be 'check' or 'hat'")


def _check_bottlenecks(n, positions, epsilons):
    pos = [int(x) for x in positions]
    eps = [float(e) for e in epsilons]
    if n < 1:
        raise ValueError("n must be at least 1")
    if not pos or len(pos) != len(eps):
        raise ValueError("need matching, nonempty positions and epsilons")
    if any(b <= a for a, b in zip(pos, pos[1:])) or pos[0] < 1 or pos[-1] > n:
        raise ValueError("positions must be strictly increasing in 1..n")
    if any(not (e > 0 and math.isfinite(e)) for e in eps):
        raise ValueError("epsilons must be positive")
    return np.array(pos, dtype=float), np.array(eps)


def _window_minimum(n, x, eps, exhaustive):
    # C_{n,2}: test functions summing the one-cut functions over a run of
    # consecutive bottlenecks, each weighted by 1/eps
    k = x.size
    w = 1.0 / eps
    if not exhaustive:
        return float(np.min((n + 1) * eps / (x * (n - x + 1))))
    best = math.inf
    for m1 in range(k):
        num = (n + 1) * np.cumsum(w[m1:])
        sx = np.cumsum(x[m1:] * w[m1:])
        den = np.cumsum((n - x[m1:] + 1) * w[m1:] * sx)
        best = min(best, float(np.min(num / den)))
    return best


def bottleneck_bounds(n: int, positions: Sequence[int], epsilons: Sequence[float], exhaustive: bool | None = None) -> GapBracket:
    """Gap bracket for a bottleneck path.

    One bottleneck at ``x`` (reflected to ``x <= ceil(n/2)``):
    ``1/(n^2/4 + x/eps) <= gap <= min(2(1 - cos(pi/(n-x+1))), eps(n+1)/(x(n-x+1)))``;
    the last term is the Rayleigh quotient of the indicator split at the
    bottleneck.  Several bottlenecks use the two-constant bracket with the
    window minimum taken over all ``O(k^2)`` windows, or over single
    bottlenecks when ``exhaustive`` is false (default: exhaustive up to
    ``10^4`` bottlenecks).
    """
    x, eps = _check_bottlenecks(n, positions, epsilons)
    k = x.size
    if k == 1:
        xi, e = float(x[0]), float(eps[0])
        if xi > -(-n // 2):
            xi = n - xi + 1
        lower = 1.0 / (n * n / 4.0 + xi / e)
        upper = min(2.0 * (1.0 - math.cos(math.pi / (n - xi + 1))), e * (n + 1) / (xi * (n - xi + 1)))
        return GapBracket(lower, upper, "single-bottleneck")
    d = np.minimum(x, n - x + 1)
    denom = n * n / 4.0 + math.fsum(d * (1.0 / eps - 1.0))
    if denom <= 0:
        raise ValueError("lower-bound constant is undefined for these conductances")
    c1 = 1.0 / denom
    if exhaustive is None:
        exhaustive = k <= 10_000
    c2 = _window_minimum(n, x, eps, exhaustive)
    lower = min(1.0 / (4.0 * n * n), c1 / 2.0)
    upper = min(2.0 * (1.0 - math.cos(math.pi / (n - k + 1))), c2)
    return GapBracket(lower, upper, "multi-bottleneck")


def bottleneck_asymptotic_coefficient(a: float, b: float):
    """Limit of ``n^2 * gap`` for one bottleneck with ``x/n -> b`` and
    ``x/(eps n^2) -> a``.

    * ``b = 0``: ``min(pi^2, 1/a)``.
    * ``0 < b <= 1/2``: ``k^2`` for the root ``k`` in ``(0, pi]`` of
      ``cot(k b) + cot(k (1 - b)) = (a/b) k``, the continuum eigen-equation
      with a jump ``f(b+) - f(b-) = (a/b) f'(b)`` across the bottleneck.
    * ``a = inf``: the gap is ``eps/x`` to first order; returns
      :data:`USE_EPS_OVER_X`.
    """
    a = float(a)
    b = float(b)
    if not (a >= 0 and 0 <= b <= 0.5):
        raise ValueError("need a in [0, inf] and b in [0, 1/2]")
    if math.isinf(a):
        return USE_EPS_OVER_X
    if b == 0:
        return math.pi**2 if a == 0 else min(math.pi**2, 1.0 / a)
    if a == 0:
        return math.pi**2
    return case2_root(a, b) ** 2


def case2_residual(a: float, b: float, k: float) -> float:
    return math.sin(k) - (a / b) * k * math.sin(k * b) * math.sin(k * (1 - b))


def case2_root(a: float, b: float) -> float:
    f = lambda k: 1.0 / math.tan(k * b) + 1.0 / math.tan(k * (1 - b)) - (a / b) * k  # noqa: E731
    lo = 1e-8
    while f(lo) <= 0:
        lo *= 1e-3
    return brentq(f, lo, math.pi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def uniform_bottleneck_order(n: int, positions: Sequence[int], epsilons: Sequence[float], profile: str = "finite", window: float | None = None, spread: float | None = None) -> float:
    """Order of magnitude of the gap of a bottleneck path (not a bracket).

    ``profile``:

    * ``"finite"``: ``min(1/n^2, min_i eps_i / min(x_i, n - x_i + 1))``.
    * ``"faraway"``: every ``d_i = min(x_i, n - x_i + 1)`` lies in
      ``(spread * window, window / spread)``; order
      ``min(1/n^2, (sum 1/eps_i)^{-1} / window)``.  Defaults:
      ``window = sqrt(min d * max d)``.
    * ``"uniform"``: ``x_i = floor(i n / k)`` with ``k <= n/2``; order
      ``min(1/n^2, eps_1 / (n k))``.
    """
    x, eps = _check_bottlenecks(n, positions, epsilons)
    k = x.size
    d = np.minimum(x, n - x + 1)
    if profile == "finite":
        return float(min(1.0 / n**2, np.min(eps / d)))
    if profile == "faraway":
        if 2 * k > n:
            raise ValueError("too many bottlenecks (need n - k of order n)")
        if window is None:
            window = math.sqrt(d.min() * d.max())
        if spread is not None:
            if not 0 < spread < 1:
                raise ValueError("spread must lie in (0, 1)")
            if not (np.all(spread * window < d) and np.all(d < window / spread)):
                raise ValueError("bottleneck distances fall outside the window")
        return float(min(1.0 / n**2, 1.0 / (math.fsum(1.0 / eps) * window)))
    if profile == "uniform":
        if 2 * k > n:
            raise ValueError("need k <= n/2")
        want = np.floor(np.arange(1, k + 1) * n / k)
        if not np.array_equal(want, x):
            raise ValueError("positions must be floor(i n / k)")
        return float(min(1.0 / n**2, eps[0] / (n * k)))
    raise ValueError("profile must be 'finite', 'faraway' or 'uniform'")
