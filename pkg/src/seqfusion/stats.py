"""Welch's two-sample t-test with a self-contained Student-t tail."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InsufficientSamples, InvalidDf

_CF_TOL = 1e-14
_CF_MAX_ITER = 300
_TINY = 1e-300


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    degrees_of_freedom: float
    p_value: float
    zero_variance: bool = False


def _beta_cf(a, b, x):
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_TOL:
            break
    return h


def regularized_incomplete_beta(x, a, b, one_minus_x=None):
    """I_x(a, b). ``one_minus_x`` may be passed to avoid cancellation."""
    y = 1.0 - x if one_minus_x is None else one_minus_x
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    log_front = (a * math.log(x) + b * math.log(y)
                 + math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, y) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    """Two-sided tail probability P(|T| >= |t|) for T ~ Student-t(df)."""
    if not df > 0 or not math.isfinite(df):
        raise InvalidDf(f"degrees of freedom must be positive, got {df}")
    t = abs(float(t))
    if t == 0.0:
        return 1.0
    if math.isinf(t):
        return 0.0
    t2 = t * t
    x = df / (df + t2)
    p = regularized_incomplete_beta(x, df / 2.0, 0.5, one_minus_x=t2 / (df + t2))
    return min(1.0, max(0.0, p))


def welch_t_test(a, b) -> TTestResult:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na, nb = a.shape[0], b.shape[0]
    if na < 2 or nb < 2:
        raise InsufficientSamples(f"need >= 2 samples per group, got {na} and {nb}")
    ma, mb = float(np.mean(a)), float(np.mean(b))
    va, vb = float(np.var(a, ddof=1)), float(np.var(b, ddof=1))
    qa, qb = va / na, vb / nb
    se2 = qa + qb
    if se2 == 0.0:
        if ma == mb:
            return TTestResult(0.0, float(na + nb - 2), 1.0, zero_variance=True)
        t = math.copysign(math.inf, ma - mb)
        return TTestResult(t, float(na + nb - 2), 0.0, zero_variance=True)
    t = (ma - mb) / math.sqrt(se2)
    df = se2 * se2 / (qa * qa / (na - 1) + qb * qb / (nb - 1))
    return TTestResult(t, df, student_t_two_sided_p(t, df))
