"""Pure-Python/numpy implementations of the hot kernels.

Same signatures and algorithms as the compiled ``_core`` extension; used when
the extension is unavailable or ``LYAPFLOW_BACKEND=python`` is set.
"""

from __future__ import annotations

import math

import numpy as np

EPS = np.finfo(float).eps
MAX_QR_ITER = 100


def balance(a: np.ndarray) -> np.ndarray:
    """Diagonal similarity by powers of 2 equalizing row and column norms (in place).

    Returns the scale vector.
    """
    n = a.shape[0]
    scale = np.ones(n)
    radix, sqrdx = 2.0, 4.0
    done = False
    while not done:
        done = True
        for i in range(n):
            c = np.abs(a[:, i]).sum() - abs(a[i, i])
            r = np.abs(a[i, :]).sum() - abs(a[i, i])
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
                a[i, :] *= g
                a[:, i] *= f
    return scale


def orthes(a: np.ndarray) -> np.ndarray:
    """Householder reduction of a square matrix to upper Hessenberg form (in place)."""
    n = a.shape[0]
    ort = np.zeros(n)
    for m in range(1, n - 1):
        col = a[m:, m - 1]
        scale = np.abs(col).sum()
        if scale == 0.0:
            continue
        ort[m:] = col / scale
        h = float(ort[m:] @ ort[m:])
        g = math.sqrt(h)
        if ort[m] > 0:
            g = -g
        h -= ort[m] * g
        ort[m] -= g
        v = ort[m:]
        # H = (I - u u'/h) A (I - u u'/h)
        f = (v @ a[m:, m:]) / h
        a[m:, m:] -= np.outer(v, f)
        f = (a[:, m:] @ v) / h
        a[:, m:] -= np.outer(f, v)
        ort[m] *= scale
        a[m, m - 1] = scale * g
        a[m + 1 :, m - 1] = 0.0
    return a


def hqr(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR.

    ``a`` is overwritten.  Returns real and imaginary parts.
    """
    n = a.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = float(np.abs(np.triu(a, -1)).sum())
    nn = n - 1
    t = 0.0
    while nn >= 0:
        its = 0
        while True:
            l = nn
            while l >= 1:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                if abs(a[l, l - 1]) <= EPS * s:
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
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z:
                        wr[nn] = x - w / z
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if its >= MAX_QR_ITER:
                raise ArithmeticError("QR iteration did not converge")
            if its and its % 10 == 0:
                t += x
                idx = np.arange(nn + 1)
                a[idx, idx] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                x = y = 0.75 * s
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
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
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
                    r = a[k + 2, k - 1] if k != nn - 1 else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
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
                rows = a[k, k : nn + 1] + q * a[k + 1, k : nn + 1]
                if last:
                    rows += r * a[k + 2, k : nn + 1]
                    a[k + 2, k : nn + 1] -= rows * z
                a[k + 1, k : nn + 1] -= rows * y
                a[k, k : nn + 1] -= rows * x
                mmin = min(nn, k + 3)
                cols = x * a[l : mmin + 1, k] + y * a[l : mmin + 1, k + 1]
                if last:
                    cols += z * a[l : mmin + 1, k + 2]
                    a[l : mmin + 1, k + 2] -= cols * r
                a[l : mmin + 1, k + 1] -= cols * q
                a[l : mmin + 1, k] -= cols
            if l >= nn - 1:
                break
    return wr, wi


def _profile(theta: float, cc: np.ndarray, sc: np.ndarray) -> tuple[float, float]:
    """(f(theta), F(theta)) for f = sum c_h cos(h theta) + s_h sin(h theta), h >= 1."""
    f = 0.0
    big = 0.0
    for h in range(cc.shape[0]):
        m = h + 1
        c = math.cos(m * theta)
        s = math.sin(m * theta)
        f += cc[h] * c + sc[h] * s
        big += (cc[h] * s - sc[h] * c) / m
    return f, big


def run_trials(
    uniforms: np.ndarray,
    d: int,
    scale: float,
    cos_c: np.ndarray,
    sin_c: np.ndarray,
    strain_amp: float,
    burn: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Run a block of independent products, vectorized over trials.

    ``uniforms`` has shape (trials, burn + n, slots).  Returns the log-norm
    growth accumulated after the burn-in and the final unit row vectors.
    """
    trials, steps, _ = uniforms.shape
    npairs = d * (d - 1)
    pair = {}
    for i in range(d):
        for j in range(d):
            if i != j:
                pair[i, j] = len(pair)
    strain_slots = {}
    for i in range(d):
        for j in range(i + 1, d):
            strain_slots[i, j] = npairs + len(strain_slots)
    harm = np.arange(1, cos_c.shape[1] + 1)
    x = np.zeros((trials, d))
    x[:, 0] = 1.0
    total = np.zeros(trials)
    comp = np.zeros(trials)
    for step in range(steps):
        u = uniforms[:, step, :]
        phi = np.empty((trials, npairs))
        xi = np.empty((trials, npairs))
        big = np.empty((trials, npairs))
        for i in range(d - 1, -1, -1):
            for j in range(d):
                if i == j:
                    continue
                p = pair[i, j]
                ang = math.pi * (2.0 * u[:, p] - 1.0)
                if j > i:
                    ang = ang + scale * sum(big[:, pair[j, k]] for k in range(d) if k != j)
                phi[:, p] = ang
                mt = np.outer(ang, harm)
                cs, sn = np.cos(mt), np.sin(mt)
                xi[:, p] = scale * (cs @ cos_c[p] + sn @ sin_c[p])
                big[:, p] = (sn @ (cos_c[p] / harm)) - (cs @ (sin_c[p] / harm))
        for i in range(d):
            xin = x[:, i].copy()
            for j in range(d):
                if j != i:
                    x[:, j] += xi[:, pair[i, j]] * xin
            if strain_amp != 0.0 and i < d - 1:
                for j in range(i + 1, d):
                    th = math.pi * (2.0 * u[:, strain_slots[i, j]] - 1.0)
                    e = np.exp(strain_amp * np.cos(th))
                    x[:, i] *= e
                    x[:, j] /= e
        nrm = np.sqrt((x * x).sum(axis=1))
        x /= nrm[:, None]
        if step >= burn:
            # Kahan summation of log norms
            yv = np.log(nrm) - comp
            tv = total + yv
            comp = (tv - total) - yv
            total = tv
    return total, x
