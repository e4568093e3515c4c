import dataclasses
import math
import typing as t

import numpy as np

from src.exceptions import TeleDriveStatisticsError
from src.numeric import Array

__all__: tuple[str, ...] = (
    "WelchResult",
    "regularized_beta",
    "student_t_cdf",
    "student_t_two_sided",
    "pearson_r",
    "linear_regression",
    "welch_t_test",
)

_FRACTION_EPS = 1e-15
_FRACTION_TINY = 1e-300
_FRACTION_ITERATIONS = 10_000


@dataclasses.dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p: float
    mean_a: float
    sd_a: float
    mean_b: float
    sd_b: float


def _samples(values: t.Sequence[float] | Array, name: str, minimum: int = 2) -> Array:
    array = np.asarray(values, dtype=np.float64).reshape(-1)
    if len(array) < minimum:
        raise TeleDriveStatisticsError(f"{name} needs at least {minimum} samples, got {len(array)}.")
    if not np.all(np.isfinite(array)):
        raise TeleDriveStatisticsError(f"{name} contains non-finite samples.")
    return array


def _beta_fraction(a: float, b: float, x: float) -> float:
    """Continued fraction of the incomplete beta function, evaluated with the modified Lentz method."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) >= _FRACTION_TINY else _FRACTION_TINY)
    h = d
    delta = 0.0
    for m in range(1, _FRACTION_ITERATIONS + 1):
        m2 = 2 * m
        for numerator in (
            m * (b - m) * x / ((qam + m2) * (a + m2)),
            -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2)),
        ):
            d = 1.0 + numerator * d
            d = 1.0 / (d if abs(d) >= _FRACTION_TINY else _FRACTION_TINY)
            c = 1.0 + numerator / c
            c = c if abs(c) >= _FRACTION_TINY else _FRACTION_TINY
            delta = d * c
            h *= delta
        if abs(delta - 1.0) < _FRACTION_EPS:
            return h
    raise TeleDriveStatisticsError(f"incomplete beta fraction did not converge for a={a}, b={b}, x={x}.")


def regularized_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta ``I_x(a, b)``; exactly 0 at ``x = 0`` and 1 at ``x = 1``."""
    if a <= 0.0 or b <= 0.0:
        raise TeleDriveStatisticsError(f"incomplete beta needs positive shape parameters, got a={a}, b={b}.")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = math.exp(math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x))
    # the fraction converges fast only on this side of the mean; use the symmetry otherwise
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_fraction(a, b, x) / a
    return 1.0 - front * _beta_fraction(b, a, 1.0 - x) / b


def student_t_two_sided(t_value: float, df: float) -> float:
    """``P(|T| >= |t|)`` for Student's t with ``df`` degrees of freedom."""
    if df <= 0.0:
        raise TeleDriveStatisticsError(f"degrees of freedom must be positive, got {df}.")
    if math.isinf(t_value):
        return 0.0
    return min(1.0, max(0.0, regularized_beta(df / (df + t_value * t_value), df / 2.0, 0.5)))


def student_t_cdf(t_value: float, df: float) -> float:
    tail = 0.5 * student_t_two_sided(t_value, df)
    return 1.0 - tail if t_value > 0.0 else tail


def _centered(xs: t.Sequence[float] | Array, ys: t.Sequence[float] | Array) -> tuple[Array, Array]:
    x = _samples(xs, "correlation")
    y = _samples(ys, "correlation")
    if len(x) != len(y):
        raise TeleDriveStatisticsError(f"paired samples differ in length: {len(x)} vs {len(y)}.")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise TeleDriveStatisticsError("correlation is undefined when a sample has zero variance.")
    return x - x.mean(), y - y.mean()


def pearson_r(xs: t.Sequence[float] | Array, ys: t.Sequence[float] | Array) -> float:
    dx, dy = _centered(xs, ys)
    r = float(np.dot(dx, dy) / math.sqrt(float(np.dot(dx, dx)) * float(np.dot(dy, dy))))
    return min(1.0, max(-1.0, r))


def linear_regression(xs: t.Sequence[float] | Array, ys: t.Sequence[float] | Array) -> tuple[float, float]:
    """Ordinary least squares fit ``y = slope * x + intercept``."""
    dx, dy = _centered(xs, ys)
    slope = float(np.dot(dx, dy) / np.dot(dx, dx))
    intercept = float(np.mean(np.asarray(ys, dtype=np.float64)) - slope * np.mean(np.asarray(xs, dtype=np.float64)))
    return slope, intercept


def welch_t_test(a: t.Sequence[float] | Array, b: t.Sequence[float] | Array) -> WelchResult:
    """
    Two-sided Welch's t-test with Welch-Satterthwaite degrees of freedom.

    When both samples are constant the test degenerates: equal means give
    ``t = 0, p = 1``, different means give ``t = +-inf, p = 0``, and ``df`` is
    reported as ``len(a) + len(b) - 2``.
    """
    xa = _samples(a, "welch_t_test sample a")
    xb = _samples(b, "welch_t_test sample b")
    na, nb = len(xa), len(xb)
    mean_a, mean_b = float(xa.mean()), float(xb.mean())
    var_a, var_b = float(np.var(xa, ddof=1)), float(np.var(xb, ddof=1))
    sd_a, sd_b = math.sqrt(var_a), math.sqrt(var_b)
    se_a, se_b = var_a / na, var_b / nb
    se2 = se_a + se_b
    if se2 == 0.0:
        df = float(na + nb - 2)
        if mean_a == mean_b:
            return WelchResult(0.0, df, 1.0, mean_a, sd_a, mean_b, sd_b)
        return WelchResult(math.copysign(math.inf, mean_a - mean_b), df, 0.0, mean_a, sd_a, mean_b, sd_b)
    t_value = (mean_a - mean_b) / math.sqrt(se2)
    df = se2 * se2 / (se_a * se_a / (na - 1) + se_b * se_b / (nb - 1))
    return WelchResult(t_value, df, student_t_two_sided(t_value, df), mean_a, sd_a, mean_b, sd_b)
