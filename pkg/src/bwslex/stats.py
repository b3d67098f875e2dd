"""Self-contained statistics kernel: correlation, Welch's t-test, quantiles.

No scipy/numpy here on purpose: the t-distribution CDF is evaluated through a
continued-fraction regularized incomplete beta (modified Lentz), so the kernel
has no dependency beyond the math stdlib and stays reentrant and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

_BETA_TOL = 1e-12
_BETA_MAX_ITER = 300
_FPMIN = 1e-300


class UndefinedCorrelationError(ValueError):
    """Raised when a correlation is requested over a constant sequence."""


class DegenerateTestError(ValueError):
    """Raised when both samples of a two-sample test have zero variance."""


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p_two_tailed: float
    n1: int
    n2: int
    mean1: float
    mean2: float


def mean(xs: Sequence[float]) -> float:
    return sum(xs) / len(xs)


def variance(xs: Sequence[float]) -> float:
    """Unbiased (n-1) sample variance."""
    n = len(xs)
    if n < 2:
        raise ValueError("variance needs at least 2 observations")
    m = mean(xs)
    return sum((x - m) ** 2 for x in xs) / (n - 1)


def _betacf(a: float, b: float, x: float) -> float:
    # Continued fraction for the incomplete beta, modified Lentz iteration.
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_TOL:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if x < 0.0 or x > 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # Use the continued fraction on whichever side converges fast.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_tailed(t: float, df: float) -> float:
    """Two-tailed p-value of the Student-t distribution with df degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return betainc(df / 2.0, 0.5, x)


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    if len(x) != len(y):
        raise ValueError("sequences must have equal length")
    if len(x) < 2:
        raise ValueError("correlation needs at least 2 observations")
    mx = mean(x)
    my = mean(y)
    sxy = sxx = syy = 0.0
    for xi, yi in zip(x, y):
        dx = xi - mx
        dy = yi - my
        sxy += dx * dy
        sxx += dx * dx
        syy += dy * dy
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("correlation undefined for constant input")
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def rankdata(xs: Sequence[float]) -> list[float]:
    """Ranks starting at 1; ties receive the average (fractional) rank."""
    n = len(xs)
    order = sorted(range(n), key=lambda i: xs[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation: Pearson over average-tied rank vectors."""
    return pearson(rankdata(x), rankdata(y))


def welch_t(a: Sequence[float], b: Sequence[float]) -> WelchResult:
    """Welch's unequal-variance t-test with Welch-Satterthwaite df, two-tailed p."""
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise ValueError("each sample needs at least 2 observations")
    m1, m2 = mean(a), mean(b)
    v1, v2 = variance(a), variance(b)
    if v1 == 0.0 and v2 == 0.0:
        raise DegenerateTestError("both samples have zero variance")
    se1 = v1 / n1
    se2 = v2 / n2
    t = (m1 - m2) / math.sqrt(se1 + se2)
    df = (se1 + se2) ** 2 / (se1 ** 2 / (n1 - 1) + se2 ** 2 / (n2 - 1))
    p = student_t_two_tailed(t, df)
    return WelchResult(t=t, df=df, p_two_tailed=p, n1=n1, n2=n2, mean1=m1, mean2=m2)


def quantile(xs: Sequence[float], q: float) -> float:
    """Linear-interpolation (type-7) quantile of a sample."""
    if not xs:
        raise ValueError("quantile of empty sequence")
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    ss = sorted(xs)
    h = (len(ss) - 1) * q
    lo = math.floor(h)
    hi = min(lo + 1, len(ss) - 1)
    return ss[lo] + (h - lo) * (ss[hi] - ss[lo])
