"""Shooting profiles and their shape classification.

For ``lam > 0`` the forward profile ``xi`` solves the eigen-equation on
every vertex but the last, starting from ``xi(1) = -1``:

    xi(k+1) = xi(k) + ([xi(k) - xi(k-1)] nu(k-1,k) - lam pi(k) xi(k)) / nu(k,k+1)

so ``lam`` is an eigenvalue exactly when ``pi(xi) = 0``.  Positions reported
in ``peak_valleys`` and by :func:`sign_changes` are 1-based vertex labels;
arrays are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from .chain_model import WeightedPath

ZERO_TOL = K.ZERO_TOL


class TypeInfo(NamedTuple):
    type_index: int
    peak_valleys: tuple
    trailing_plateau: bool


@dataclass(frozen=True)
class ShootingProfile:
    lam: float
    values: np.ndarray
    partial_sums: np.ndarray
    increment_signs: np.ndarray
    type_index: int
    peak_valleys: tuple
    trailing_plateau: bool
    pi_mean: float
    abs_mass: float
    mean_scale: float
    boundary_value: float
    log_scale: int

    @property
    def mean_is_zero(self) -> bool:
        """``pi(xi)`` is below the cancellation floor of the last addition
        that produced it (``mean_scale``)."""
        return abs(self.pi_mean) <= ZERO_TOL * self.mean_scale

    @property
    def mean_sign(self) -> int:
        if self.mean_is_zero:
            return 0
        return 1 if self.pi_mean > 0 else -1


@dataclass(frozen=True)
class ClippedProfile:
    lam: float
    clip_order: int
    values: np.ndarray
    plateau_start: int
    pi_mean: float
    boundary_value: float
    energy: float
    variance: float

    @property
    def rayleigh(self) -> float:
        return self.energy / self.variance


def _classify_signs(signs: np.ndarray) -> TypeInfo:
    runs = []
    d = 0
    a = b = 0
    for k, sg in enumerate(signs.tolist()):
        if sg == 0:
            continue
        if d == 0:
            d, a, b = sg, k + 1, k + 2
        elif sg == d:
            b = k + 2
        else:
            runs.append((a, b))
            d, a, b = sg, k + 1, k + 2
    if d == 0:
        raise ValueError("every increment is below tolerance")
    runs.append((a, b))
    return TypeInfo(len(runs), tuple(runs), bool(signs[-1] == 0))


def classify_type(values, zero_tol: float = ZERO_TOL) -> TypeInfo:
    """Type of a vector: the number of maximal strictly monotone runs.

    An increment counts as zero when it is at most ``zero_tol`` times the
    largest magnitude seen so far.  A flat step between two runs of
    opposite direction gives ``a_{j+1} = b_j + 1``.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("values must be a nonempty vector")
    if not v[0] < 0:
        raise ValueError("values[0] must be negative")
    if v.size == 1:
        raise ValueError("a single value has no increments")
    dv = np.diff(v)
    scale = np.maximum.accumulate(np.abs(v))[1:]
    signs = np.where(np.abs(dv) <= zero_tol * scale, 0, np.sign(dv)).astype(np.int8)
    return _classify_signs(signs)


def sign_changes(values) -> np.ndarray:
    """Positions ``s_1 < s_2 < ...`` (1-based) where the vector changes sign
    or vanishes; missing ones are reported as ``n + 1``.  Length ``n - 1``."""
    v = np.asarray(values, dtype=float)
    n = v.size
    if n == 0:
        raise ValueError("values must be nonempty")
    hits = [l for l in range(2, n + 1) if v[l - 1] * v[l - 2] < 0 or v[l - 1] == 0]
    out = np.full(max(n - 1, 0), n + 1, dtype=np.int64)
    out[: len(hits)] = hits[: n - 1]
    return out


def rayleigh(path: WeightedPath, values) -> float:
    """Dirichlet form over variance, ``E_nu(f, f) / Var_pi(f)``."""
    v = np.ascontiguousarray(values, dtype=float)
    if v.shape != (path.n,):
        raise ValueError("values must have one entry per vertex")
    if np.all(v == v[0]):
        raise ValueError("constant vector has zero variance")
    e, var, _ = K.rayleigh_terms(path.pi, path.nu, v)
    return e / var


def _check_lam(lam: float) -> float:
    lam = float(lam)
    if not lam > 0 or not np.isfinite(lam):
        raise ValueError("lambda must be positive and finite")
    return lam


def _shoot_arrays(pi, nu, lam, x0=-1.0):
    n = pi.size
    values = np.empty(n)
    partial = np.empty(n)
    signs = np.empty(n - 1, dtype=np.int8)
    sexp = np.empty(n, dtype=np.int64)
    e, s, c = K.shoot_store(pi, nu, lam, x0, values, partial, signs, sexp)
    if e:
        shift = -K.RESCALE_EXP * (e - sexp)
        values = np.ldexp(values, shift)
        partial = np.ldexp(partial, shift)
    return values, partial, signs, int(e), float(s), float(c)


def shoot(path: WeightedPath, lam: float) -> ShootingProfile:
    """Forward profile ``xi_lam`` with ``xi(1) = -1`` (up to ``2**log_scale``)."""
    lam = _check_lam(lam)
    values, partial, signs, e, s, c = _shoot_arrays(path.pi, path.nu, lam)
    info = _classify_signs(signs)
    return ShootingProfile(
        lam=lam,
        values=values,
        partial_sums=partial,
        increment_signs=signs,
        type_index=info.type_index,
        peak_valleys=info.peak_valleys,
        trailing_plateau=info.trailing_plateau,
        pi_mean=float(partial[-1]),
        abs_mass=s,
        mean_scale=c,
        boundary_value=float(values[-1]),
        log_scale=K.RESCALE_EXP * e,
    )


def shoot_reverse(path: WeightedPath, lam: float) -> ShootingProfile:
    """Backward profile started from ``xi(n) = -1``.

    Arrays are indexed like the path; ``partial_sums[k]`` is the tail sum
    from vertex ``k`` to the end, ``increment_signs[k]`` is the sign of
    ``xi(k) - xi(k+1)`` and ``peak_valleys`` lists runs in reading order
    (from vertex ``n`` down) with original vertex labels.
    """
    n = path.n
    fwd = shoot(path.reversed(), lam)
    pv = tuple((n + 1 - a, n + 1 - b) for a, b in fwd.peak_valleys)
    return ShootingProfile(
        lam=fwd.lam,
        values=fwd.values[::-1].copy(),
        partial_sums=fwd.partial_sums[::-1].copy(),
        increment_signs=fwd.increment_signs[::-1].copy(),
        type_index=fwd.type_index,
        peak_valleys=pv,
        trailing_plateau=fwd.trailing_plateau,
        pi_mean=fwd.pi_mean,
        abs_mass=fwd.abs_mass,
        mean_scale=fwd.mean_scale,
        boundary_value=float(fwd.values[0]),
        log_scale=fwd.log_scale,
    )


def _clipped_from_values(path, lam, order, values, plateau) -> ClippedProfile:
    e, var, mean = K.rayleigh_terms(path.pi, path.nu, values)
    return ClippedProfile(
        lam=lam,
        clip_order=order,
        values=values,
        plateau_start=int(plateau),
        pi_mean=float(mean),
        boundary_value=float(values[-1]),
        energy=float(e),
        variance=float(var),
    )


def _trailing_start(signs: np.ndarray) -> int:
    nz = np.flatnonzero(signs)
    return int(nz[-1]) + 1 if nz.size else 0


def shoot_clipped(path: WeightedPath, lam: float, clip_order: int = 1, start_value: float = -1.0) -> ClippedProfile:
    """Profile frozen after its ``clip_order``-th monotone run.

    Order 1 runs the recursion with the bracket replaced by its positive
    part, which yields a non-decreasing vector.  Higher orders truncate the
    unclipped profile at the end ``b_j`` of its ``j``-th run.
    """
    lam = _check_lam(lam)
    if not start_value < 0:
        raise ValueError("start_value must be negative")
    if int(clip_order) != clip_order or clip_order < 1:
        raise ValueError("clip_order must be a positive integer")
    clip_order = int(clip_order)
    if clip_order == 1:
        values = np.empty(path.n)
        plateau = K.clipped_store(path.pi, path.nu, lam, float(start_value), values)
        return _clipped_from_values(path, lam, 1, values, plateau)
    values, _, signs, _, _, _ = _shoot_arrays(path.pi, path.nu, lam, float(start_value))
    info = _classify_signs(signs)
    if info.type_index > clip_order:
        b = info.peak_valleys[clip_order - 1][1] - 1
        values[b:] = values[b]
        plateau = b
    else:
        plateau = _trailing_start(signs)
    return _clipped_from_values(path, lam, clip_order, values, plateau)
