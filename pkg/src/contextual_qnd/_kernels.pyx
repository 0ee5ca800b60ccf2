# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled grid-scan kernels (see ``_kernels_py`` for the reference version)."""

from libc.math cimport sin, cos, sqrt, pow, INFINITY


cdef inline bint _feasible(int region, double a1, double a2, double c,
                           double sn, double sm, double slack) nogil:
    cdef double lhs = (1.0 - a1) * (1.0 - a2)
    cdef double rhs
    if region == 0:
        rhs = c
    else:
        rhs = sn - sqrt(a1 * a2) * sm
        rhs = rhs * rhs
    return lhs >= rhs - slack


def linear_region_scan(double w1, double w2, int region, double c, double s,
                       int n, int m, double lo1, double hi1, double lo2,
                       double hi2, int npts, double slack):
    cdef double step1 = (hi1 - lo1) / (npts - 1)
    cdef double step2 = (hi2 - lo2) / (npts - 1)
    cdef double sn = pow(s, n)
    cdef double sm = pow(s, m)
    cdef double best = -INFINITY, b1 = lo1, b2 = lo2
    cdef double a1, a2, top, lo, hi, mid, val
    cdef int i, j, jtop, it
    for i in range(npts):
        a1 = hi1 if i == npts - 1 else i * step1 + lo1
        jtop = -1
        for j in range(npts):
            a2 = hi2 if j == npts - 1 else j * step2 + lo2
            if _feasible(region, a1, a2, c, sn, sm, slack):
                jtop = j
        if jtop < 0:
            continue
        top = hi2 if jtop == npts - 1 else jtop * step2 + lo2
        if jtop < npts - 1:
            lo = top
            hi = hi2 if jtop + 1 == npts - 1 else (jtop + 1) * step2 + lo2
            for it in range(200):
                mid = 0.5 * (lo + hi)
                if mid <= lo or mid >= hi:
                    break
                if _feasible(region, a1, mid, c, sn, sm, slack):
                    lo = mid
                else:
                    hi = mid
            top = lo
        val = w1 * a1 + w2 * top
        if val > best:
            best = val
            b1 = a1
            b2 = top
    return b1, b2, best


def bloch_ratio_scan(double[::1] num, double[::1] den, double t_lo, double t_hi,
                     int nt, double p_lo, double p_hi, int np_):
    cdef double tstep = (t_hi - t_lo) / (nt - 1)
    cdef double pstep = (p_hi - p_lo) / (np_ - 1)
    cdef double best = -INFINITY, bt = t_lo, bp = p_lo
    cdef double t, p, st, ct, nu, de, val, x, y
    cdef int i, j
    for i in range(nt):
        t = t_hi if i == nt - 1 else i * tstep + t_lo
        st = sin(t)
        ct = cos(t)
        for j in range(np_):
            p = p_hi if j == np_ - 1 else j * pstep + p_lo
            x = st * cos(p)
            y = st * sin(p)
            de = den[0] + den[1] * x + den[2] * y + den[3] * ct
            if de <= 0.0:
                continue
            nu = num[0] + num[1] * x + num[2] * y + num[3] * ct
            val = nu / de
            if val > best:
                best = val
                bt = t
                bp = p
    return bt, bp, best
