"""Paired and Welch t-tests with a self-contained Student-t distribution.

The t distribution is evaluated through the regularized incomplete beta
function, computed with the modified Lentz continued fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DegenerateSeries

_EPS = 1e-16
_TINY = 1e-300


def _beta_cf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _TINY else _TINY)
    h = d
    for m in range(1, 10_000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction failed (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    return _betainc(a, b, x, 1.0 - x)


def _betainc(a, b, x, y):
    # ``y`` is ``1 - x`` supplied by the caller so it keeps full precision near x = 1.
    if a <= 0 or b <= 0:
        raise ValueError("betainc needs a > 0 and b > 0")
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log(y)
    )
    front = math.exp(log_front)
    # The fraction converges fast only on the near side of the mean.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, y) / b


def _upper_tail(t, df):
    # P(T > |t|) via I_x(df/2, 1/2) with x = df/(df + t^2).
    t2 = t * t
    denom = df + t2
    return 0.5 * _betainc(0.5 * df, 0.5, df / denom, t2 / denom)


def t_sf(t: float, df: float) -> float:
    """Upper tail P(T > t)."""
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    tail = _upper_tail(t, df)
    return tail if t >= 0 else 1.0 - tail


def t_cdf(t: float, df: float) -> float:
    """Student-t cumulative probability P(T <= t)."""
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    tail = _upper_tail(t, df)
    return 1.0 - tail if t >= 0 else tail


def t_pdf(t: float, df: float) -> float:
    log_norm = math.lgamma(0.5 * (df + 1)) - math.lgamma(0.5 * df) - 0.5 * math.log(df * math.pi)
    return math.exp(log_norm - 0.5 * (df + 1) * math.log1p(t * t / df))


def inv_t_cdf(p: float, df: float, tol: float = 1e-13) -> float:
    """Quantile of the Student-t distribution.

    Solves for the upper-tail probability with a relative tolerance, so
    far-tail quantiles keep their accuracy. Bisection on a bracket that
    always contains the root, accelerated by Newton steps that stay inside.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    if df <= 0:
        raise ValueError("df must be positive")
    if p == 0.5:
        return 0.0
    q = p if p < 0.5 else 1.0 - p
    sign = -1.0 if p < 0.5 else 1.0
    lo, hi = 0.0, 1.0
    while _upper_tail(hi, df) > q:
        lo, hi = hi, hi * 2.0
    x = 0.5 * (lo + hi)
    for _ in range(400):
        f = _upper_tail(x, df) - q
        if abs(f) <= tol * q:
            break
        if f > 0:
            lo = x
        else:
            hi = x
        step = x + f / t_pdf(x, df)
        x = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4e-16 * hi:
            break
    return sign * x


@dataclass(frozen=True)
class TTestResult:
    mean_a: float
    mean_b: float
    n: int
    pearson_r: float
    t_stat: float
    df: float
    p_one_tail: float
    p_two_tail: float
    t_crit_one: float
    t_crit_two: float
    alpha: float
    variant: str = "paired"

    @property
    def significant(self) -> bool:
        return self.p_two_tail < self.alpha

    def rows(self) -> list[tuple[str, float | int | str]]:
        return [
            ("variant", self.variant),
            ("alpha", self.alpha),
            ("mean_a", self.mean_a),
            ("mean_b", self.mean_b),
            ("observations", self.n),
            ("pearson_r", self.pearson_r),
            ("df", self.df),
            ("t_stat", self.t_stat),
            ("p_one_tail", self.p_one_tail),
            ("t_crit_one_tail", self.t_crit_one),
            ("p_two_tail", self.p_two_tail),
            ("t_crit_two_tail", self.t_crit_two),
        ]


def _as_pair(a, b):
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("series must be one-dimensional and of equal length")
    if x.size < 2:
        raise ValueError("series need at least two observations")
    return x, y


def pearson(a: Sequence[float], b: Sequence[float]) -> float:
    """Sample correlation coefficient of two equal-length series."""
    x, y = _as_pair(a, b)
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise DegenerateSeries("correlation undefined for a constant series")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def _pearson_or_nan(x, y):
    try:
        return pearson(x, y)
    except DegenerateSeries:
        return math.nan


def _t_report(t_stat, df, alpha):
    if math.isnan(t_stat):
        p_one = 0.5
    else:
        p_one = t_sf(abs(t_stat), df)
    crit_one, crit_two = _criticals(alpha, df)
    return p_one, min(1.0, 2.0 * p_one), crit_one, crit_two


@lru_cache(maxsize=256)
def _criticals(alpha, df):
    return inv_t_cdf(1.0 - alpha, df), inv_t_cdf(1.0 - alpha / 2.0, df)


def paired_t_test(a: Sequence[float], b: Sequence[float], alpha: float = 0.05) -> TTestResult:
    """Paired two-sample t-test on ``a - b``.

    A zero spread of differences gives ``t = 0`` when the mean difference
    is also zero, and an infinite ``t`` otherwise.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    x, y = _as_pair(a, b)
    n = x.size
    d = x - y
    mean_d = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        t_stat = 0.0 if mean_d == 0.0 else math.copysign(math.inf, mean_d)
    else:
        t_stat = mean_d / (sd / math.sqrt(n))
    df = n - 1
    p_one, p_two, crit_one, crit_two = _t_report(t_stat, df, alpha)
    return TTestResult(
        float(x.mean()), float(y.mean()), n, _pearson_or_nan(x, y),
        t_stat, df, p_one, p_two, crit_one, crit_two, alpha, "paired",
    )


def welch_t_test(a: Sequence[float], b: Sequence[float], alpha: float = 0.05) -> TTestResult:
    """Two-sample t-test assuming unequal variances (Welch-Satterthwaite df)."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    x, y = _as_pair(a, b)
    n = x.size
    va, vb = float(x.var(ddof=1)) / n, float(y.var(ddof=1)) / n
    diff = float(x.mean() - y.mean())
    se2 = va + vb
    if se2 == 0.0:
        t_stat = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        df = 2.0 * (n - 1)
    else:
        t_stat = diff / math.sqrt(se2)
        df = se2 * se2 / (va * va / (n - 1) + vb * vb / (n - 1))
    p_one, p_two, crit_one, crit_two = _t_report(t_stat, df, alpha)
    return TTestResult(
        float(x.mean()), float(y.mean()), n, _pearson_or_nan(x, y),
        t_stat, df, p_one, p_two, crit_one, crit_two, alpha, "welch",
    )
