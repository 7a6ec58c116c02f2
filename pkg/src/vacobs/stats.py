"""Two-sample statistical tests over salary and contract cross-sections.

The distribution functions (Student t, chi-square, Kolmogorov) are computed
here from series and continued-fraction expansions so results do not depend
on any external statistics library.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from typing import Sequence


class StatTestKind(str, Enum):
    WELCH_T = "WelchT"
    KS_2SAMPLE = "KS2Sample"
    CHI_SQUARE = "ChiSquare"


@dataclass(frozen=True)
class StatTestResult:
    test: StatTestKind
    statistic: float
    p_value: float
    df_or_n: float  # Welch-Satterthwaite df, KS effective n, or chi-square df


class DegenerateSample(ValueError):
    """Raised when a test's inputs carry no usable variation."""


class ZeroExpected(ValueError):
    """Raised when a contingency table yields a zero expected cell count."""


# --- special functions -------------------------------------------------

_EPS = 3e-16
_FPMIN = 1e-300
_MAX_ITER = 500


def _beta_cf(a: float, b: float, x: float) -> float:
    # Lentz's continued fraction for the incomplete beta integral.
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
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
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def _gamma_p_series(a: float, x: float) -> float:
    ap = a
    total = 1.0 / a
    term = total
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise ArithmeticError("incomplete gamma series did not converge")


def _gamma_q_cf(a: float, x: float) -> float:
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise ArithmeticError("incomplete gamma continued fraction did not converge")


def regularized_gamma_p(a: float, x: float) -> float:
    """P(a, x), the lower regularized incomplete gamma function."""
    if a <= 0:
        raise ValueError("shape parameter must be positive")
    if x < 0:
        raise ValueError("argument must be non-negative")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _gamma_p_series(a, x)
    return 1.0 - _gamma_q_cf(a, x)


def regularized_gamma_q(a: float, x: float) -> float:
    """Q(a, x) = 1 - P(a, x), computed without cancellation for large x."""
    if a <= 0:
        raise ValueError("shape parameter must be positive")
    if x < 0:
        raise ValueError("argument must be non-negative")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_p_series(a, x)
    return _gamma_q_cf(a, x)


def student_t_cdf(x: float, df: float) -> float:
    """CDF of the Student t distribution with df degrees of freedom."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if x == 0.0:
        return 0.5
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, df / (df + x * x))
    return 1.0 - tail if x > 0 else tail


def chi_square_cdf(x: float, df: float) -> float:
    """CDF of the chi-square distribution with df degrees of freedom."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if x <= 0:
        return 0.0
    return regularized_gamma_p(df / 2.0, x / 2.0)


def kolmogorov_cdf(x: float) -> float:
    """CDF of the Kolmogorov distribution, K(x) = P(sup|B(t)| <= x)."""
    if x <= 0:
        return 0.0
    if x < 1.18:
        # Jacobi theta form: converges in a few terms for small x.
        t = math.exp(-math.pi * math.pi / (8.0 * x * x))
        series = t * (1.0 + t**8 * (1.0 + t**16 * (1.0 + t**24)))
        return math.sqrt(2.0 * math.pi) / x * series
    total = 0.0
    sign = 1.0
    for k in range(1, 200):
        term = sign * math.exp(-2.0 * k * k * x * x)
        total += term
        if abs(term) < 1e-18:
            break
        sign = -sign
    return min(1.0, max(0.0, 1.0 - 2.0 * total))


def kolmogorov_survival(x: float) -> float:
    """Upper tail of the Kolmogorov distribution."""
    if x <= 0:
        return 1.0
    if x < 1.18:
        return 1.0 - kolmogorov_cdf(x)
    total = 0.0
    sign = 1.0
    for k in range(1, 200):
        term = sign * math.exp(-2.0 * k * k * x * x)
        total += term
        if abs(term) < 1e-18:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


# --- tests --------------------------------------------------------------


def _mean_and_variance(sample: Sequence[float]) -> tuple[float, float]:
    n = len(sample)
    mean = math.fsum(sample) / n
    var = math.fsum((v - mean) ** 2 for v in sample) / (n - 1)
    return mean, var


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> StatTestResult:
    """Two-sided Welch t-test for a difference in means.

    Uses the Welch-Satterthwaite approximation for the degrees of freedom,
    so equal variances are not assumed.
    """
    if len(a) < 2 or len(b) < 2:
        raise DegenerateSample("each sample needs at least two observations")
    mean_a, var_a = _mean_and_variance(a)
    mean_b, var_b = _mean_and_variance(b)
    if var_a == 0.0 and var_b == 0.0:
        raise DegenerateSample("both samples have zero variance")
    sq_a = var_a / len(a)
    sq_b = var_b / len(b)
    se2 = sq_a + sq_b
    stat = (mean_a - mean_b) / math.sqrt(se2)
    df = se2 * se2 / (sq_a * sq_a / (len(a) - 1) + sq_b * sq_b / (len(b) - 1))
    p = regularized_incomplete_beta(df / 2.0, 0.5, df / (df + stat * stat))
    return StatTestResult(StatTestKind.WELCH_T, stat, min(1.0, max(0.0, p)), df)


def _ecdf_sup_diff(a: Sequence[float], b: Sequence[float]) -> float:
    sa = sorted(a)
    sb = sorted(b)
    na, nb = len(sa), len(sb)
    d = 0.0
    for v in sorted(set(sa).union(sb)):
        fa = bisect_right(sa, v) / na
        fb = bisect_right(sb, v) / nb
        diff = abs(fa - fb)
        if diff > d:
            d = diff
    return d


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> StatTestResult:
    """Two-sample Kolmogorov-Smirnov test.

    D is the supremum distance between the two empirical CDFs; the p-value
    comes from the asymptotic Kolmogorov distribution evaluated at
    sqrt(n_eff) * D with n_eff = |a||b| / (|a| + |b|).
    """
    if not a or not b:
        raise ValueError("both samples must be non-empty")
    d = _ecdf_sup_diff(a, b)
    n_eff = len(a) * len(b) / (len(a) + len(b))
    p = kolmogorov_survival(math.sqrt(n_eff) * d)
    return StatTestResult(StatTestKind.KS_2SAMPLE, d, p, n_eff)


def chi_square_test(observed: Sequence[Sequence[float]]) -> StatTestResult:
    """Pearson chi-square test of independence on an r x c table."""
    rows = [list(map(float, row)) for row in observed]
    if len(rows) < 2 or any(len(row) != len(rows[0]) for row in rows):
        raise ValueError("table must be rectangular with at least 2 rows")
    n_cols = len(rows[0])
    if n_cols < 2:
        raise ValueError("table needs at least 2 columns")
    if any(v < 0 for row in rows for v in row):
        raise ValueError("cell counts must be non-negative")
    row_totals = [math.fsum(row) for row in rows]
    col_totals = [math.fsum(row[j] for row in rows) for j in range(n_cols)]
    grand = math.fsum(row_totals)
    if grand <= 0:
        raise ZeroExpected("table has no observations")
    stat = 0.0
    for i, row in enumerate(rows):
        for j, obs in enumerate(row):
            expected = row_totals[i] * col_totals[j] / grand
            if expected <= 0:
                raise ZeroExpected(f"expected count for cell ({i},{j}) is zero")
            stat += (obs - expected) ** 2 / expected
    df = (len(rows) - 1) * (n_cols - 1)
    p = regularized_gamma_q(df / 2.0, stat / 2.0)
    return StatTestResult(StatTestKind.CHI_SQUARE, stat, min(1.0, max(0.0, p)), float(df))
