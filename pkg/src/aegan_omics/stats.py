"""Regularized incomplete beta function and Student-t tail probabilities."""
import math

import numpy as np

_TINY = 1e-300
_CF_EPS = 1e-15
_CF_MAXITER = 500

_lgamma = np.frompyfunc(math.lgamma, 1, 1)


def _lnbeta(a, b):
    return (_lgamma(a) + _lgamma(b) - _lgamma(a + b)).astype(np.float64)


def _betacf(a, b, x):
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for m in range(1, _CF_MAXITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        h = np.where(done, h, h * d * c)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < _CF_EPS
        if done.all():
            break
    return h


def betainc(a, b, x):
    """Regularized incomplete beta ``I_x(a, b)``, elementwise with broadcasting."""
    a, b, x = np.broadcast_arrays(np.asarray(a, dtype=np.float64),
                                  np.asarray(b, dtype=np.float64),
                                  np.asarray(x, dtype=np.float64))
    scalar = a.ndim == 0
    a, b, x = (np.atleast_1d(v).astype(np.float64) for v in (a, b, x))
    if np.any((x < 0) | (x > 1)):
        raise ValueError("betainc requires 0 <= x <= 1")
    if np.any((a <= 0) | (b <= 0)):
        raise ValueError("betainc requires a, b > 0")
    out = np.empty_like(x)
    out[x == 0] = 0.0
    out[x == 1] = 1.0
    inner = (x > 0) & (x < 1)
    if inner.any():
        ai, bi, xi = a[inner], b[inner], x[inner]
        ln_front = ai * np.log(xi) + bi * np.log1p(-xi) - _lnbeta(ai, bi)
        direct = xi < (ai + 1.0) / (ai + bi + 2.0)
        res = np.empty_like(xi)
        if direct.any():
            aa, bb, xx = ai[direct], bi[direct], xi[direct]
            res[direct] = np.exp(ln_front[direct]) * _betacf(aa, bb, xx) / aa
        flip = ~direct
        if flip.any():
            aa, bb, xx = bi[flip], ai[flip], 1.0 - xi[flip]
            res[flip] = 1.0 - np.exp(ln_front[flip]) * _betacf(aa, bb, xx) / aa
        out[inner] = res
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out


def t_two_sided_p(t, df):
    """``P(|T| >= |t|)`` for Student t with ``df`` degrees of freedom."""
    t = np.asarray(t, dtype=np.float64)
    df = np.asarray(df, dtype=np.float64)
    t, df = np.broadcast_arrays(t, df)
    scalar = t.ndim == 0
    t, df = np.atleast_1d(t), np.atleast_1d(df)
    p = np.ones_like(t)
    inf = np.isinf(t)
    p[inf] = 0.0
    fin = ~inf & (t != 0)
    if fin.any():
        x = df[fin] / (df[fin] + t[fin] ** 2)
        p[fin] = betainc(df[fin] / 2.0, 0.5, x)
    return float(p[0]) if scalar else p


def t_cdf(t, df):
    """Student t CDF via the incomplete beta identity."""
    half = 0.5 * t_two_sided_p(t, df)
    t = np.asarray(t, dtype=np.float64)
    return np.where(t >= 0, 1.0 - half, half) if t.ndim else (1.0 - half if t >= 0 else half)
