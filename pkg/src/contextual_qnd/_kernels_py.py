"""Pure-numpy reference implementation of the grid-scan kernels.

Signatures and tie-breaking (first maximum in row-major order) match the
compiled ``_kernels`` extension.
"""

import numpy as np


def _feasible(region, a1, a2, c, sn, sm, slack):
    lhs = (1.0 - a1) * (1.0 - a2)
    if region == 0:
        rhs = c
    else:
        rhs = sn - np.sqrt(a1 * a2) * sm
        rhs = rhs * rhs
    return lhs >= rhs - slack


def _axis(lo, hi, npts):
    step = (hi - lo) / (npts - 1)
    x = np.arange(npts) * step + lo
    x[-1] = hi
    return x


def linear_region_scan(w1, w2, region, c, s, n, m, lo1, hi1, lo2, hi2, npts, slack):
    """Max of ``w1*a1 + w2*a2`` over a region, scanning ``a1`` on a grid.

    ``region`` 0 is ``(1-a1)(1-a2) >= c``; region 1 is the two-state cloning
    condition ``(1-a1)(1-a2) >= (s**n - sqrt(a1 a2) s**m)**2``.  Both accept
    ``slack`` below the threshold.  In each ``a1`` column the largest feasible
    grid ``a2`` is pushed to the region edge by bisection against the next
    (infeasible) grid point.  Returns ``(a1, a2, value)``; value is ``-inf``
    when no grid point is feasible.
    """
    sn, sm = float(s) ** n, float(s) ** m
    a1 = _axis(lo1, hi1, npts)
    a2 = _axis(lo2, hi2, npts)
    ok = _feasible(region, a1[:, None], a2[None, :], c, sn, sm, slack)
    has = ok.any(axis=1)
    if not has.any():
        return lo1, lo2, -np.inf
    jtop = npts - 1 - np.argmax(ok[:, ::-1], axis=1)
    lo = a2[jtop].copy()
    hi = a2[np.minimum(jtop + 1, npts - 1)].copy()
    active = has & (jtop < npts - 1)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        active &= (mid > lo) & (mid < hi)
        if not active.any():
            break
        good = _feasible(region, a1, mid, c, sn, sm, slack)
        lo = np.where(active & good, mid, lo)
        hi = np.where(active & ~good, mid, hi)
    val = np.where(has, w1 * a1 + w2 * lo, -np.inf)
    i = int(np.argmax(val))
    return float(a1[i]), float(lo[i]), float(val[i])


def bloch_ratio_scan(num, den, t_lo, t_hi, nt, p_lo, p_hi, np_):
    """Max over Bloch angles of ``(num0 + num.n) / (den0 + den.n)``.

    ``n = (sin t cos p, sin t sin p, cos t)`` on an ``nt x np_`` grid.
    Returns ``(t, p, value)``.
    """
    t = _axis(t_lo, t_hi, nt)
    p = _axis(p_lo, p_hi, np_)
    st = np.sin(t)[:, None]
    ct = np.cos(t)[:, None]
    x = st * np.cos(p)[None, :]
    y = st * np.sin(p)[None, :]
    de = den[0] + den[1] * x + den[2] * y + den[3] * ct
    nu = num[0] + num[1] * x + num[2] * y + num[3] * ct
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where(de > 0.0, nu / de, -np.inf)
    flat = int(np.argmax(val))
    i, j = divmod(flat, np_)
    return float(t[i]), float(p[j]), float(val[i, j])
