"""Compiled inner loops for the shooting recursion and the dichotomies.

All loops carry the partial sums ``T_k = sum_{j<=k} pi[j] x[j]`` and step
with ``x[k+1] = x[k] - lam * T_k / nu[k]``, which is the three-term
recursion rewritten so that the small quantity ``T_k`` is what gets
accumulated.  The sign of the increment ``x[k+1] - x[k]`` is ``-sign(T_k)``.

An increment is treated as zero when ``|T_k| <= ZERO_TOL * C_k`` with
``C_k = |T_{k-1}| + pi[k] |x[k]|``, i.e. when ``T_k`` is lost in the
cancellation of the addition that produced it.  The scale is local: once
the profile has decayed far below its earlier size, the accumulated mass
``S_k = sum_{j<=k} pi[j] |x[j]|`` says nothing about the rounding error of
``T_k``, and measuring against it would flatten every later increment.
When ``|x|`` passes ``2**100`` the running state is multiplied by
``2**-100``; the recursion is linear so this changes nothing but the scale.
"""

from numba import njit

ZERO_TOL = 1e-13
BIG = 2.0**100
SHRINK = 2.0**-100
RESCALE_EXP = 100


@njit(cache=True, nogil=True)
def _sign_of_step(t, c):
    if abs(t) <= ZERO_TOL * c:
        return 0
    return -1 if t > 0.0 else 1


@njit(cache=True, nogil=True)
def shoot_store(pi, nu, lam, x0, values, partial, signs, scale_exp):
    """Full forward profile.

    Fills ``values``/``partial`` (each in the units current when written),
    ``signs[k]`` for the increment from vertex k to k+1 and ``scale_exp[k]``
    (number of rescalings applied before vertex k was written).  Returns the
    total number of rescalings, the final ``S`` and the final ``C``.
    """
    n = pi.shape[0]
    x = x0
    t = pi[0] * x
    s = pi[0] * abs(x)
    c = s
    e = 0
    values[0] = x
    partial[0] = t
    scale_exp[0] = 0
    for k in range(n - 1):
        signs[k] = _sign_of_step(t, c)
        x = x - lam * t / nu[k]
        c = abs(t) + pi[k + 1] * abs(x)
        t = t + pi[k + 1] * x
        s = s + pi[k + 1] * abs(x)
        if abs(x) > BIG:
            x *= SHRINK
            t *= SHRINK
            s *= SHRINK
            c *= SHRINK
            e += 1
        values[k + 1] = x
        partial[k + 1] = t
        scale_exp[k + 1] = e
    return e, s, c


@njit(cache=True, nogil=True)
def shoot_summary(pi, nu, lam):
    """Type index, trailing-plateau flag, T_n, C_n and the last two values
    of the forward profile (same scale), without storing the profile."""
    n = pi.shape[0]
    x_prev = -1.0
    x = -1.0
    t = -pi[0]
    c = pi[0]
    last = 0
    changes = 0
    sg = 0
    for k in range(n - 1):
        sg = _sign_of_step(t, c)
        if sg != 0:
            if last != 0 and sg != last:
                changes += 1
            last = sg
        x_prev = x
        x = x - lam * t / nu[k]
        c = abs(t) + pi[k + 1] * abs(x)
        t = t + pi[k + 1] * x
        if abs(x) > BIG:
            x *= SHRINK
            x_prev *= SHRINK
            t *= SHRINK
            c *= SHRINK
    return changes + 1, sg == 0, t, c, x, x_prev


@njit(cache=True, nogil=True)
def clipped_mean_sign(pi, nu, tail, lam):
    """Sign of pi(phi) for the order-1 clipped profile started at -1.

    ``tail[k] = sum_{j>k} pi[j]``.  Returns -1, 0 or 1.
    """
    n = pi.shape[0]
    x = -1.0
    t = -pi[0]
    c = pi[0]
    k = 0
    while k < n - 1:
        if t >= 0.0 or abs(t) <= ZERO_TOL * c:
            break
        x = x - lam * t / nu[k]
        c = abs(t) + pi[k + 1] * abs(x)
        t = t + pi[k + 1] * x
        if abs(x) > BIG:
            x *= SHRINK
            t *= SHRINK
            c *= SHRINK
        k += 1
    m = t + x * tail[k]
    if abs(m) <= ZERO_TOL * (abs(t) + abs(x) * tail[k]):
        return 0
    return 1 if m > 0.0 else -1


@njit(cache=True, nogil=True)
def clipped_store(pi, nu, lam, x0, values):
    """Order-1 clipped profile.  Returns the 0-based plateau start.

    Increments stop as soon as the bracket ``-lam * T_k`` is not positive;
    from then on the profile is constant.  Growth before the clip is
    bounded, but a rescale is still applied (in place) if it ever occurs.
    """
    n = pi.shape[0]
    x = x0
    t = pi[0] * x
    c = abs(t)
    values[0] = x
    plateau = n - 1
    for k in range(n - 1):
        if t >= 0.0 or abs(t) <= ZERO_TOL * c:
            plateau = k
            break
        x = x - lam * t / nu[k]
        c = abs(t) + pi[k + 1] * abs(x)
        t = t + pi[k + 1] * x
        if abs(x) > BIG:
            for j in range(k + 1):
                values[j] *= SHRINK
            x *= SHRINK
            t *= SHRINK
            c *= SHRINK
        values[k + 1] = x
    for j in range(plateau + 1, n):
        values[j] = values[plateau]
    return plateau


@njit(cache=True, nogil=True)
def rayleigh_terms(pi, nu, values):
    """Dirichlet form and variance (two-pass) of ``values``."""
    n = pi.shape[0]
    mean = 0.0
    for k in range(n):
        mean += pi[k] * values[k]
    var = 0.0
    for k in range(n):
        d = values[k] - mean
        var += pi[k] * d * d
    en = 0.0
    for k in range(n - 1):
        d = values[k + 1] - values[k]
        en += nu[k] * d * d
    return en, var, mean


@njit(cache=True, nogil=True)
def _tol(u, tol_abs, tol_rel):
    return max(tol_abs, tol_rel * u)


@njit(cache=True, nogil=True)
def dichotomy_di(pi, nu, idx, lo, hi, tol_abs, tol_rel, max_iter, hist_lo, hist_hi):
    """Bisection for the ``idx``-th eigenvalue (1-based) driven by the type
    of the forward profile and, at matching type, by the sign of
    ``(-1)^(idx-1) pi(xi)``.  Returns the number of halvings performed."""
    hist_lo[0] = lo
    hist_hi[0] = hi
    it = 0
    while it < max_iter and hi - lo > _tol(hi, tol_abs, tol_rel):
        lam = lo + 0.5 * (hi - lo)
        if lam <= lo or lam >= hi:
            break
        typ, trail, t, c, x, xp = shoot_summary(pi, nu, lam)
        if typ > idx:
            hi = lam
        elif typ < idx:
            lo = lam
        elif abs(t) <= ZERO_TOL * c:
            lo = lam
            hi = lam
        else:
            sg = t if (idx - 1) % 2 == 0 else -t
            if sg > 0.0:
                hi = lam
            else:
                lo = lam
        it += 1
        hist_lo[it] = lo
        hist_hi[it] = hi
    return it


@njit(cache=True, nogil=True)
def dichotomy_gap(pi, nu, tail, lo, hi, tol_abs, tol_rel, max_iter, hist_lo, hist_hi):
    """Bisection for the spectral gap on the sign of pi(phi_lam)."""
    hist_lo[0] = lo
    hist_hi[0] = hi
    it = 0
    while it < max_iter and hi - lo > _tol(hi, tol_abs, tol_rel):
        lam = lo + 0.5 * (hi - lo)
        if lam <= lo or lam >= hi:
            break
        sg = clipped_mean_sign(pi, nu, tail, lam)
        if sg > 0:
            hi = lam
        elif sg < 0:
            lo = lam
        else:
            lo = lam
            hi = lam
        it += 1
        hist_lo[it] = lo
        hist_hi[it] = hi
    return it
