"""Independent reference implementations used to check the library."""
import math
from fractions import Fraction

import numpy as np
from scipy import integrate


def t_density(x, df):
    c = math.exp(math.lgamma((df + 1) / 2) - math.lgamma(df / 2)) / math.sqrt(df * math.pi)
    return c * (1 + x * x / df) ** (-(df + 1) / 2)


def welch_p_quadrature(a, b):
    """Two-sided Welch p-value from direct numeric integration of the t density."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    t = (a.mean() - b.mean()) / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va ** 2 / (a.size - 1) + vb ** 2 / (b.size - 1))
    tail, _ = integrate.quad(t_density, abs(t), np.inf, args=(df,), epsabs=1e-14, epsrel=1e-12)
    return t, 2.0 * tail


def bh_brute_force(p):
    """Adjusted p_i = min over ranks k >= rank(i) of m p_(k) / k, capped at 1."""
    p = [float(v) for v in p]
    m = len(p)
    order = sorted(range(m), key=lambda i: (p[i], i))
    rank = {i: r + 1 for r, i in enumerate(order)}
    out = []
    for i in range(m):
        best = min(m * p[order[k - 1]] / k for k in range(rank[i], m + 1))
        out.append(min(best, 1.0))
    return out


def concordance_auc(labels, scores):
    """Probability a random positive outranks a random negative, ties count half."""
    labels = list(labels)
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = Fraction(0)
    for sp in pos:
        for sn in neg:
            total += 1 if sp > sn else Fraction(1, 2) if sp == sn else 0
    return float(total / (len(pos) * len(neg)))


def f1_exact(precision, recall):
    p, r = Fraction(str(precision)), Fraction(str(recall))
    return float(2 * p * r / (p + r))
