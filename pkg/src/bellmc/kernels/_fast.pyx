# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-event counting kernels.

Scalar-loop twin of numpy_backend: identical inputs, identical outputs,
identical floating-point operation order per event.  The build disables
FMA contraction (-ffp-contract=off) so the C arithmetic rounds exactly
like the numpy expressions; keep every formula in lockstep with
numpy_backend.py — the cross-backend identity test enforces it.
"""

from libc.math cimport cos, sin, sqrt, floor, exp

NAME = "compiled"


cdef inline double _radial(int profile_id, double scale, double r) nogil:
    if profile_id == 0:
        return 1.0
    if profile_id == 1:
        return r / scale
    return exp(-(r * r) / (2.0 * scale * scale))


cdef inline double _eval(int model_id, int profile_id, double epsilon, double scale,
                         double amplitude, double lam, double bx, double by,
                         double gamma, long* clamps) nogil:
    cdef double c, c2, base, r2, c2l, s2l, num, orient, g, raw, r
    if model_id == 0:  # malus-probabilistic
        c = cos(lam - gamma)
        return c * c
    if model_id == 1:  # malus-deterministic
        c2 = cos(2.0 * (lam - gamma))
        if c2 >= 0.0:
            return 1.0
        return 0.0
    if model_id == 2:  # impact-modulated
        c = cos(lam - gamma)
        base = c * c
        r2 = bx * bx + by * by
        if r2 > 0.0:
            c2l = cos(2.0 * lam)
            s2l = sin(2.0 * lam)
            num = (bx * bx - by * by) * c2l + 2.0 * bx * by * s2l
            orient = num / r2
        else:
            orient = 0.0
        g = _radial(profile_id, scale, sqrt(r2))
        raw = base + epsilon * orient * g
        if raw < 0.0:
            clamps[0] += 1
            return 0.0
        if raw > 1.0:
            clamps[0] += 1
            return 1.0
        return raw
    # scalar-particle
    r = sqrt(bx * bx + by * by)
    raw = amplitude * _radial(profile_id, scale, r)
    if raw < 0.0:
        clamps[0] += 1
        return 0.0
    if raw > 1.0:
        clamps[0] += 1
        return 1.0
    return raw


def pair_counts(double[::1] lam, double[::1] px, double[::1] py,
                double[::1] dx, double[::1] dy, double[::1] dz,
                double[::1] u1, double[::1] u2,
                double length_1, double length_2, double period,
                double cx, double cy, double alpha, double beta,
                tuple spec_1, tuple spec_2):
    """Scalar-loop equivalent of numpy_backend.pair_counts."""
    cdef Py_ssize_t n = lam.shape[0]
    if (px.shape[0] != n or py.shape[0] != n or dx.shape[0] != n
            or dy.shape[0] != n or dz.shape[0] != n
            or u1.shape[0] != n or u2.shape[0] != n):
        raise ValueError("event arrays must share one length")

    cdef int m1_id = spec_1[0]
    cdef int m1_profile = spec_1[1]
    cdef double m1_eps = spec_1[2]
    cdef double m1_scale = spec_1[3]
    cdef double m1_amp = spec_1[4]
    cdef int m2_id = spec_2[0]
    cdef int m2_profile = spec_2[1]
    cdef double m2_eps = spec_2[2]
    cdef double m2_scale = spec_2[3]
    cdef double m2_amp = spec_2[4]

    cdef double ca = cos(alpha)
    cdef double sa = sin(alpha)
    cdef double cb = cos(beta)
    cdef double sb = sin(beta)
    cdef double half = 0.5 * period

    cdef long n_pp = 0, n_pm = 0, n_mp = 0, n_mm = 0, clamps = 0
    cdef Py_ssize_t i, err = -1
    cdef double tx, ty, h1x, h1y, h2x, h2y
    cdef double xr, yr, b1x, b1y, b2x, b2y, p1, p2
    cdef bint o1, o2

    with nogil:
        for i in range(n):
            if dz[i] <= 0.0:
                err = i
                break
            tx = dx[i] / dz[i]
            ty = dy[i] / dz[i]
            h1x = px[i] + length_1 * tx
            h1y = py[i] + length_1 * ty
            h2x = px[i] - length_2 * tx
            h2y = py[i] - length_2 * ty

            xr = h1x - cx
            yr = h1y - cy
            b1x = ca * xr + sa * yr
            b1y = ca * yr - sa * xr
            b1x = b1x - period * floor(b1x / period + 0.5)
            b1y = b1y - period * floor(b1y / period + 0.5)
            if b1x >= half:
                b1x -= period
            if b1x < -half:
                b1x += period
            if b1y >= half:
                b1y -= period
            if b1y < -half:
                b1y += period

            xr = h2x - cx
            yr = h2y - cy
            b2x = cb * xr + sb * yr
            b2y = cb * yr - sb * xr
            b2x = b2x - period * floor(b2x / period + 0.5)
            b2y = b2y - period * floor(b2y / period + 0.5)
            if b2x >= half:
                b2x -= period
            if b2x < -half:
                b2x += period
            if b2y >= half:
                b2y -= period
            if b2y < -half:
                b2y += period

            p1 = _eval(m1_id, m1_profile, m1_eps, m1_scale, m1_amp,
                       lam[i], b1x, b1y, alpha, &clamps)
            p2 = _eval(m2_id, m2_profile, m2_eps, m2_scale, m2_amp,
                       lam[i], b2x, b2y, beta, &clamps)
            o1 = u1[i] < p1
            o2 = u2[i] < p2
            if o1:
                if o2:
                    n_pp += 1
                else:
                    n_pm += 1
            else:
                if o2:
                    n_mp += 1
                else:
                    n_mm += 1

    if err >= 0:
        return (0, 0, 0, 0, 0, 0, 0, err)
    return (n_pp + n_pm, n_pp + n_mp, n_pp, n_pm, n_mp, n_mm, clamps, -1)


def qm_counts(double[::1] u, double alpha, double beta):
    """Scalar-loop equivalent of numpy_backend.qm_counts."""
    cdef Py_ssize_t n = u.shape[0]
    cdef double c = cos(alpha - beta)
    cdef double peq = c * c
    cdef double t1 = 0.5 * peq
    cdef double t2 = peq
    cdef double t3 = peq + 0.5 * (1.0 - peq)
    cdef long n_pp = 0, n_mm = 0, n_pm = 0, n_mp = 0
    cdef Py_ssize_t i

    with nogil:
        for i in range(n):
            if u[i] < t1:
                n_pp += 1
            elif u[i] < t2:
                n_mm += 1
            elif u[i] < t3:
                n_pm += 1
            else:
                n_mp += 1

    return (n_pp + n_pm, n_pp + n_mp, n_pp, n_pm, n_mp, n_mm, 0, -1)
