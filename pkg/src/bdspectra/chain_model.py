"""Weighted paths, birth-and-death chains and the named example families.

Vertices are stored 0-based everywhere.  A path with ``n`` vertices has
vertex weights ``pi[0..n-1]`` and edge weights ``nu[0..n-2]`` where
``nu[k]`` sits on the edge ``{k, k+1}``.  Chains on ``{0..m-1}`` use the
same labels, and the two-sided Metropolis chains on ``{-n..n}`` are
relabelled by ``i -> i + n``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

PROB_TOL = 1e-12


def _frozen(x: Sequence[float]) -> np.ndarray:
    a = np.array(x, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class WeightedPath:
    """A path graph carrying a probability ``pi`` on vertices and positive
    conductances ``nu`` on edges.

    The associated generator acts by
    ``(M f)(k) = [nu[k-1] (f(k) - f(k-1)) + nu[k] (f(k) - f(k+1))] / pi[k]``.
    """

    pi: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        pi = _frozen(self.pi)
        nu = _frozen(self.nu)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "nu", nu)
        if pi.ndim != 1 or nu.ndim != 1:
            raise ValueError("pi and nu must be one-dimensional")
        if pi.size < 2:
            raise ValueError("a weighted path needs at least 2 vertices")
        if nu.size != pi.size - 1:
            raise ValueError(f"expected {pi.size - 1} edge weights, got {nu.size}")
        if not (np.all(np.isfinite(pi)) and np.all(np.isfinite(nu))):
            raise ValueError("weights must be finite")
        if np.any(pi <= 0) or np.any(nu <= 0):
            raise ValueError("weights must be strictly positive")
        total = math.fsum(pi)
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"pi must sum to 1 (got {total!r})")

    @property
    def n(self) -> int:
        return int(self.pi.size)

    def reversed(self) -> "WeightedPath":
        return WeightedPath(self.pi[::-1].copy(), self.nu[::-1].copy())

    def scaled(self, c: float) -> "WeightedPath":
        """Same vertex measure, conductances multiplied by ``c``."""
        return WeightedPath(self.pi, c * self.nu)

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.n)
        d[:-1] += self.nu
        d[1:] += self.nu
        return d / self.pi

    def generator(self) -> np.ndarray:
        """Dense generator matrix.  Meant for small paths and tests."""
        n = self.n
        m = np.diag(self.diagonal())
        k = np.arange(n - 1)
        m[k, k + 1] = -self.nu / self.pi[:-1]
        m[k + 1, k] = -self.nu / self.pi[1:]
        return m


@dataclass(frozen=True)
class BirthDeathChain:
    """Transition rates of a nearest-neighbour chain on ``{0..m-1}``."""

    p: np.ndarray
    q: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        p, q, r = _frozen(self.p), _frozen(self.q), _frozen(self.r)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)
        if not (p.shape == q.shape == r.shape) or p.ndim != 1:
            raise ValueError("p, q, r must be vectors of equal length")
        m = p.size
        if m < 2:
            raise ValueError("a chain needs at least 2 states")
        for name, v in (("p", p), ("q", q), ("r", r)):
            if not np.all(np.isfinite(v)) or np.any(v < 0) or np.any(v > 1):
                raise ValueError(f"{name} entries must lie in [0, 1]")
        if p[-1] != 0 or q[0] != 0:
            raise ValueError("p[m-1] and q[0] must be 0")
        if np.any(np.abs(p + q + r - 1.0) > PROB_TOL):
            raise ValueError("rows of K must sum to 1")
        if np.any(p[:-1] <= 0) or np.any(q[1:] <= 0):
            raise ValueError("chain is not irreducible (zero interior rate)")

    @property
    def m(self) -> int:
        return int(self.p.size)

    def transition_matrix(self) -> np.ndarray:
        m = self.m
        k = np.diag(self.r.copy())
        i = np.arange(m - 1)
        k[i, i + 1] = self.p[:-1]
        k[i + 1, i] = self.q[1:]
        return k

    def is_monotone(self) -> bool:
        """``p_i + q_{i+1} <= 1`` for every edge (stochastic monotonicity)."""
        return bool(np.all(self.p[:-1] + self.q[1:] <= 1.0 + PROB_TOL))


def stationary(chain: BirthDeathChain) -> np.ndarray:
    lr = np.concatenate(([0.0], np.cumsum(np.log(chain.p[:-1]) - np.log(chain.q[1:]))))
    w = np.exp(lr - lr.max())
    return w / math.fsum(w)


def from_birth_death(chain: BirthDeathChain) -> WeightedPath:
    """Weighted path with the same spectrum as ``I - K``.

    ``pi`` is the stationary law and ``nu[i] = pi[i] * p[i]``.
    """
    pi = stationary(chain)
    return WeightedPath(pi, pi[:-1] * chain.p[:-1])


def birth_death(p, q, r=None) -> BirthDeathChain:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if r is None:
        r = 1.0 - p - q
    return BirthDeathChain(p, q, np.asarray(r, dtype=float))


def simple_random_walk(n: int) -> WeightedPath:
    """Uniform path on ``n`` vertices: ``pi = 1/n``, ``nu = 1/(2n)``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return WeightedPath(np.full(n, 1.0 / n), np.full(n - 1, 0.5 / n))


def ehrenfest(n: int) -> BirthDeathChain:
    if n < 1:
        raise ValueError("n must be at least 1")
    i = np.arange(n + 1, dtype=float)
    return BirthDeathChain(1.0 - i / n, i / n, np.zeros(n + 1))


def _metropolis(w_exp: np.ndarray, a: float) -> BirthDeathChain:
    # nearest-neighbour proposal 1/2 each way, target weights base**a
    # p_i = min(1, (b_{i+1}/b_i)^a) / 2, same for q
    base = w_exp
    up = np.zeros(base.size)
    dn = np.zeros(base.size)
    ratio_up = (base[1:] / base[:-1]) ** a
    ratio_dn = (base[:-1] / base[1:]) ** a
    up[:-1] = 0.5 * np.minimum(1.0, ratio_up)
    dn[1:] = 0.5 * np.minimum(1.0, ratio_dn)
    return BirthDeathChain(up, dn, 1.0 - up - dn)


def metropolis_check(n: int, a: float) -> BirthDeathChain:
    """Metropolis chain on ``{-n..n}`` targeting ``(|i|+1)^a``.

    State ``i`` is stored at index ``i + n``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not a > 0:
        raise ValueError("a must be positive")
    i = np.arange(-n, n + 1)
    return _metropolis(np.abs(i) + 1.0, a)


def metropolis_hat(n: int, a: float) -> BirthDeathChain:
    """Metropolis chain on ``{-n..n}`` targeting ``(n-|i|+1)^a``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not a > 0:
        raise ValueError("a must be positive")
    i = np.arange(-n, n + 1)
    return _metropolis(n - np.abs(i) + 1.0, a)


def check_normalizer_bounds(n: int, a: float) -> tuple[float, float, float]:
    """Return ``(c_{n,a}, 1/c_check, 1/c_hat)`` where ``1/c`` are the total
    unnormalized masses of the two Metropolis targets."""
    i = np.abs(np.arange(-n, n + 1))
    inv_check = math.fsum((i + 1.0) ** a)
    inv_hat = math.fsum((n - i + 1.0) ** a)
    c = (n + 1.0) ** (a + 1) / (a + 1) + (n + 1.0) ** a
    return c, inv_check, inv_hat


def uniform_path(n: int) -> WeightedPath:
    """Path on ``{0..n}`` with ``pi = nu = 1/(n+1)``."""
    return bottleneck_path(n, (), ())


def bottleneck_path(n: int, positions: Sequence[int], epsilons: Sequence[float]) -> WeightedPath:
    """Uniform path on ``{0..n}`` whose edges ``{x_j - 1, x_j}`` carry
    conductance ``eps_j / (n+1)`` instead of ``1/(n+1)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    pos = [int(x) for x in positions]
    eps = [float(e) for e in epsilons]
    if len(pos) != len(eps):
        raise ValueError("positions and epsilons differ in length")
    if any(b <= a for a, b in zip(pos, pos[1:])):
        raise ValueError("positions must be strictly increasing")
    if pos and (pos[0] < 1 or pos[-1] > n):
        raise ValueError("positions must lie in 1..n")
    if any(not (e > 0 and math.isfinite(e)) for e in eps):
        raise ValueError("epsilons must be positive")
    nu = np.full(n, 1.0 / (n + 1))
    for x, e in zip(pos, eps):
        nu[x - 1] = e / (n + 1)
    return WeightedPath(np.full(n + 1, 1.0 / (n + 1)), nu)


def principal_subpath(path: WeightedPath, m: int) -> WeightedPath:
    """Restriction to the first ``m`` vertices, rescaled to total mass 1."""
    if not 2 <= m <= path.n:
        raise ValueError(f"m must lie in 2..{path.n}")
    if m == path.n:
        return path
    c = 1.0 / math.fsum(path.pi[:m])
    return WeightedPath(c * path.pi[:m], c * path.nu[: m - 1])


# ---------------------------------------------------------------- ChainSpec

KINDS = ("explicit", "birth_death", "metropolis_check", "metropolis_hat", "ehrenfest", "srw", "bottleneck")


@dataclass(frozen=True)
class ChainSpec:
    """Serializable description of a chain or path.

    ``kind`` selects which of the other fields are read.
    """

    kind: str
    pi: tuple | None = None
    nu: tuple | None = None
    p: tuple | None = None
    q: tuple | None = None
    r: tuple | None = None
    n: int | None = None
    a: float | None = None
    positions: tuple = field(default_factory=tuple)
    epsilons: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        need = {
            "explicit": ("pi", "nu"),
            "birth_death": ("p", "q"),
            "metropolis_check": ("n", "a"),
            "metropolis_hat": ("n", "a"),
            "ehrenfest": ("n",),
            "srw": ("n",),
            "bottleneck": ("n",),
        }[self.kind]
        missing = [f for f in need if getattr(self, f) is None]
        if missing:
            raise ValueError(f"kind {self.kind!r} requires {', '.join(missing)}")

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ChainSpec":
        if not isinstance(d, dict) or "kind" not in d:
            raise ValueError("chain spec must be an object with a 'kind' field")
        unknown = set(d) - {"kind", "pi", "nu", "p", "q", "r", "n", "a", "positions", "epsilons"}
        if unknown:
            raise ValueError(f"unknown fields: {sorted(unknown)}")
        kw: dict[str, Any] = {"kind": d["kind"]}
        for f in ("pi", "nu", "p", "q", "r", "positions", "epsilons"):
            if d.get(f) is not None:
                kw[f] = tuple(d[f])
        if d.get("n") is not None:
            n = d["n"]
            if isinstance(n, bool) or not float(n).is_integer():
                raise ValueError("n must be an integer")
            kw["n"] = int(n)
        if d.get("a") is not None:
            kw["a"] = float(d["a"])
        return cls(**kw)

    @classmethod
    def from_json(cls, text: str) -> "ChainSpec":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        for f in ("pi", "nu", "p", "q", "r", "n", "a"):
            v = getattr(self, f)
            if v is not None:
                out[f] = list(v) if isinstance(v, tuple) else v
        if self.positions:
            out["positions"] = list(self.positions)
            out["epsilons"] = list(self.epsilons)
        return out

    def chain(self) -> BirthDeathChain | None:
        """The transition-rate form, when the family defines one."""
        if self.kind == "birth_death":
            return birth_death(self.p, self.q, self.r)
        if self.kind == "metropolis_check":
            return metropolis_check(self.n, self.a)
        if self.kind == "metropolis_hat":
            return metropolis_hat(self.n, self.a)
        if self.kind == "ehrenfest":
            return ehrenfest(self.n)
        return None

    def path(self) -> WeightedPath:
        if self.kind == "explicit":
            return WeightedPath(self.pi, self.nu)
        if self.kind == "srw":
            return simple_random_walk(self.n)
        if self.kind == "bottleneck":
            return bottleneck_path(self.n, self.positions, self.epsilons)
        return from_birth_death(self.chain())
