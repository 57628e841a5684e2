# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: balancing, Hessenberg reduction, Francis QR, and the product loop."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, copysign, cos, sin, exp, log, M_PI

cnp.import_array()

cdef double EPS = np.finfo(float).eps
cdef int MAX_QR_ITER = 100


def balance(double[:, ::1] a):
    """Diagonal similarity by powers of 2 equalizing row and column norms (in place).

    Returns the scale vector.
    """
    cdef Py_ssize_t n = a.shape[0]
    scale_arr = np.ones(n)
    cdef double[::1] scale = scale_arr
    cdef Py_ssize_t i, j
    cdef double c, r, g, f, s
    cdef double radix = 2.0, sqrdx = 4.0
    cdef bint done = False
    with nogil:
        while not done:
            done = True
            for i in range(n):
                c = 0.0
                r = 0.0
                for j in range(n):
                    if j != i:
                        c += fabs(a[j, i])
                        r += fabs(a[i, j])
                if c == 0.0 or r == 0.0:
                    continue
                g = r / radix
                f = 1.0
                s = c + r
                while c < g:
                    f *= radix
                    c *= sqrdx
                g = r * radix
                while c > g:
                    f /= radix
                    c /= sqrdx
                if (c + r) / f < 0.95 * s:
                    done = False
                    g = 1.0 / f
                    scale[i] *= f
                    for j in range(n):
                        a[i, j] *= g
                    for j in range(n):
                        a[j, i] *= f
    return scale_arr


def orthes(double[:, ::1] a):
    """Householder reduction to upper Hessenberg form (in place)."""
    cdef Py_ssize_t n = a.shape[0]
    cdef double[::1] ort = np.zeros(n)
    cdef Py_ssize_t m, i, j
    cdef double scale, h, g, f
    with nogil:
        for m in range(1, n - 1):
            scale = 0.0
            for i in range(m, n):
                scale += fabs(a[i, m - 1])
            if scale == 0.0:
                continue
            h = 0.0
            for i in range(n - 1, m - 1, -1):
                ort[i] = a[i, m - 1] / scale
                h += ort[i] * ort[i]
            g = sqrt(h)
            if ort[m] > 0:
                g = -g
            h -= ort[m] * g
            ort[m] -= g
            for j in range(m, n):
                f = 0.0
                for i in range(n - 1, m - 1, -1):
                    f += ort[i] * a[i, j]
                f /= h
                for i in range(m, n):
                    a[i, j] -= f * ort[i]
            for i in range(n):
                f = 0.0
                for j in range(n - 1, m - 1, -1):
                    f += ort[j] * a[i, j]
                f /= h
                for j in range(m, n):
                    a[i, j] -= f * ort[j]
            ort[m] *= scale
            a[m, m - 1] = scale * g
            for i in range(m + 1, n):
                a[i, m - 1] = 0.0
    return np.asarray(a)


def hqr(double[:, ::1] a):
    """Eigenvalues of an upper Hessenberg matrix (overwritten); returns (wr, wi)."""
    cdef Py_ssize_t n = a.shape[0]
    wr_arr = np.zeros(n)
    wi_arr = np.zeros(n)
    cdef double[::1] wr = wr_arr
    cdef double[::1] wi = wi_arr
    cdef Py_ssize_t nn, l, m, k, i, j, mmin
    cdef int its, failed = 0
    cdef double anorm = 0.0, t = 0.0
    cdef double x, y, w, p, q, r, s, z, u, v
    cdef bint last
    with nogil:
        for i in range(n):
            for j in range(i - 1 if i > 0 else 0, n):
                anorm += fabs(a[i, j])
        nn = n - 1
        while nn >= 0:
            its = 0
            while True:
                l = nn
                while l >= 1:
                    s = fabs(a[l - 1, l - 1]) + fabs(a[l, l])
                    if s == 0.0:
                        s = anorm
                    if fabs(a[l, l - 1]) <= EPS * s:
                        a[l, l - 1] = 0.0
                        break
                    l -= 1
                x = a[nn, nn]
                if l == nn:
                    wr[nn] = x + t
                    nn -= 1
                    break
                y = a[nn - 1, nn - 1]
                w = a[nn, nn - 1] * a[nn - 1, nn]
                if l == nn - 1:
                    p = 0.5 * (y - x)
                    q = p * p + w
                    z = sqrt(fabs(q))
                    x += t
                    if q >= 0.0:
                        z = p + copysign(z, p)
                        wr[nn - 1] = x + z
                        wr[nn] = x + z
                        if z != 0.0:
                            wr[nn] = x - w / z
                    else:
                        wr[nn - 1] = x + p
                        wr[nn] = x + p
                        wi[nn - 1] = -z
                        wi[nn] = z
                    nn -= 2
                    break
                if its >= MAX_QR_ITER:
                    failed = 1
                    break
                if its > 0 and its % 10 == 0:
                    t += x
                    for i in range(nn + 1):
                        a[i, i] -= x
                    s = fabs(a[nn, nn - 1]) + fabs(a[nn - 1, nn - 2])
                    x = 0.75 * s
                    y = x
                    w = -0.4375 * s * s
                its += 1
                m = nn - 2
                while m >= l:
                    z = a[m, m]
                    r = x - z
                    s = y - z
                    p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                    q = a[m + 1, m + 1] - z - r - s
                    r = a[m + 2, m + 1]
                    s = fabs(p) + fabs(q) + fabs(r)
                    p /= s
                    q /= s
                    r /= s
                    if m == l:
                        break
                    u = fabs(a[m, m - 1]) * (fabs(q) + fabs(r))
                    v = fabs(p) * (fabs(a[m - 1, m - 1]) + fabs(z) + fabs(a[m + 1, m + 1]))
                    if u <= EPS * v:
                        break
                    m -= 1
                for i in range(m + 2, nn + 1):
                    a[i, i - 2] = 0.0
                    if i != m + 2:
                        a[i, i - 3] = 0.0
                for k in range(m, nn):
                    if k != m:
                        p = a[k, k - 1]
                        q = a[k + 1, k - 1]
                        r = 0.0
                        if k != nn - 1:
                            r = a[k + 2, k - 1]
                        x = fabs(p) + fabs(q) + fabs(r)
                        if x != 0.0:
                            p /= x
                            q /= x
                            r /= x
                    s = copysign(sqrt(p * p + q * q + r * r), p)
                    if s == 0.0:
                        continue
                    if k == m:
                        if l != m:
                            a[k, k - 1] = -a[k, k - 1]
                    else:
                        a[k, k - 1] = -s * x
                    p += s
                    x = p / s
                    y = q / s
                    z = r / s
                    q /= p
                    r /= p
                    last = k != nn - 1
                    for j in range(k, nn + 1):
                        p = a[k, j] + q * a[k + 1, j]
                        if last:
                            p += r * a[k + 2, j]
                            a[k + 2, j] -= p * z
                        a[k + 1, j] -= p * y
                        a[k, j] -= p * x
                    mmin = nn if nn < k + 3 else k + 3
                    for i in range(l, mmin + 1):
                        p = x * a[i, k] + y * a[i, k + 1]
                        if last:
                            p += z * a[i, k + 2]
                            a[i, k + 2] -= p * r
                        a[i, k + 1] -= p * q
                        a[i, k] -= p
                if l >= nn - 1:
                    break
            if failed:
                break
    if failed:
        raise ArithmeticError("QR iteration did not converge")
    return wr_arr, wi_arr


cdef inline void _profile(double theta, const double[::1] cc, const double[::1] sc,
                          double* f, double* big) noexcept nogil:
    cdef Py_ssize_t h
    cdef double c, s, m
    f[0] = 0.0
    big[0] = 0.0
    for h in range(cc.shape[0]):
        m = h + 1.0
        c = cos(m * theta)
        s = sin(m * theta)
        f[0] += cc[h] * c + sc[h] * s
        big[0] += (cc[h] * s - sc[h] * c) / m


def run_trials(const double[:, :, ::1] uniforms, int d, double scale,
               const double[:, ::1] cos_c, const double[:, ::1] sin_c,
               double strain_amp, Py_ssize_t burn):
    """Run a block of independent products; see the Python fallback for the contract."""
    cdef Py_ssize_t trials = uniforms.shape[0], steps = uniforms.shape[1]
    cdef int npairs = d * (d - 1)
    out_total = np.zeros(trials)
    out_x = np.zeros((trials, d))
    cdef double[::1] total_v = out_total
    cdef double[:, ::1] x_v = out_x
    cdef int[:, ::1] pair = np.full((d, d), -1, dtype=np.intc)
    cdef int[:, ::1] sslot = np.full((d, d), -1, dtype=np.intc)
    cdef double[::1] phi = np.zeros(npairs)
    cdef double[::1] xi = np.zeros(npairs)
    cdef double[::1] big = np.zeros(npairs)
    cdef double[::1] x = np.zeros(d)
    cdef int i, j, kk, p, cnt = 0
    cdef Py_ssize_t tr, step
    cdef double ang, shift, xin, nrm, e, fval, bval, acc, comp, yv, tv
    for i in range(d):
        for j in range(d):
            if i != j:
                pair[i, j] = cnt
                cnt += 1
    for i in range(d):
        for j in range(i + 1, d):
            sslot[i, j] = cnt
            cnt += 1
    with nogil:
        for tr in range(trials):
            for i in range(d):
                x[i] = 0.0
            x[0] = 1.0
            acc = 0.0
            comp = 0.0
            for step in range(steps):
                for i in range(d - 1, -1, -1):
                    for j in range(d):
                        if i == j:
                            continue
                        p = pair[i, j]
                        ang = M_PI * (2.0 * uniforms[tr, step, p] - 1.0)
                        if j > i:
                            shift = 0.0
                            for kk in range(d):
                                if kk != j:
                                    shift = shift + big[pair[j, kk]]
                            ang = ang + scale * shift
                        phi[p] = ang
                        _profile(ang, cos_c[p], sin_c[p], &fval, &bval)
                        xi[p] = scale * fval
                        big[p] = bval
                for i in range(d):
                    xin = x[i]
                    for j in range(d):
                        if j != i:
                            x[j] += xi[pair[i, j]] * xin
                    if strain_amp != 0.0 and i < d - 1:
                        for j in range(i + 1, d):
                            e = exp(strain_amp * cos(M_PI * (2.0 * uniforms[tr, step, sslot[i, j]] - 1.0)))
                            x[i] *= e
                            x[j] /= e
                nrm = 0.0
                for i in range(d):
                    nrm += x[i] * x[i]
                nrm = sqrt(nrm)
                for i in range(d):
                    x[i] /= nrm
                if step >= burn:
                    yv = log(nrm) - comp
                    tv = acc + yv
                    comp = (tv - acc) - yv
                    acc = tv
            total_v[tr] = acc
            for i in range(d):
                x_v[tr, i] = x[i]
    return out_total, out_x
