"""
Special functions for square-root diffusion densities and moments
Log-Gamma, regularized incomplete Gamma, modified Bessel I and Kummer 1F1
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from errors import ConvergenceError, DomainError
from logger import get_specfun_logger

logger = get_specfun_logger()

# Largest argument evaluated by the defining power series of I_nu
SERIES_SWITCH = 30.0
SERIES_TERMS = 100

KUMMER_TOL = 1e-16
MAX_TERMS = 20000

# ln of the largest float64 comfortably away from overflow
_LOG_OVERFLOW = 700.0
_RESCALE = 1e280
_LOG_RESCALE = math.log(_RESCALE)


@dataclass(frozen=True)
class SpecialValue:
    """
    A special-function value, optionally held on log scale

    When log_scale is True, the represented number is sign * exp(value).
    """

    value: float
    log_scale: bool = False
    sign: int = 1

    def __post_init__(self):
        if not self.log_scale and not math.isfinite(self.value):
            raise DomainError(f"Non-finite value {self.value} must be stored on log scale")

    def exp(self):
        """Plain float (may overflow to inf for large log values)"""
        if self.log_scale:
            with np.errstate(over='ignore'):
                return float(self.sign * np.exp(self.value))
        return float(self.value)

    def log(self):
        """ln |value|"""
        if self.log_scale:
            return float(self.value)
        if self.value == 0.0:
            return -math.inf
        return math.log(abs(self.value))

    def __float__(self):
        return self.exp()


def _reject_nan(name, *values):
    for value in values:
        if np.any(np.isnan(value)):
            raise DomainError(f"{name}: NaN input")


def _is_nonpositive_integer(value):
    return value <= 0 and float(value).is_integer()


def ln_gamma(x):
    """
    Natural log of the Gamma function for x > 0

    Args:
        x: Positive finite real (scalar or array)

    Returns:
        ln Gamma(x), float for scalar input
    """
    arr = np.asarray(x, dtype=float)
    _reject_nan('ln_gamma', arr)
    if np.any(arr <= 0) or np.any(~np.isfinite(arr)):
        raise DomainError(f"ln_gamma requires finite x > 0, got {x}")
    result = special.gammaln(arr)
    return float(result) if result.ndim == 0 else result


def reg_lower_inc_gamma(s, x):
    """
    Regularized lower incomplete Gamma function P(s, x) = gamma(s, x) / Gamma(s)

    Args:
        s: Shape, s > 0
        x: Upper limit, x >= 0 (inf allowed)

    Returns:
        Value in [0, 1], float for scalar inputs
    """
    s_arr = np.asarray(s, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    _reject_nan('reg_lower_inc_gamma', s_arr, x_arr)
    if np.any(s_arr <= 0) or np.any(~np.isfinite(s_arr)):
        raise DomainError(f"reg_lower_inc_gamma requires finite s > 0, got {s}")
    if np.any(x_arr < 0):
        raise DomainError(f"reg_lower_inc_gamma requires x >= 0, got {x}")
    result = special.gammainc(s_arr, x_arr)
    return float(result) if result.ndim == 0 else result


def _log_bessel_series(nu, x):
    # ln I_nu(x) = nu ln(x/2) + ln sum_j (x/2)^{2j} / (j! Gamma(j + nu + 1)), x > 0
    j = np.arange(SERIES_TERMS, dtype=float)
    half_log = np.log(x / 2.0)[..., None]
    nu_b = np.asarray(nu, dtype=float)[..., None]
    log_terms = 2.0 * j * half_log - special.gammaln(j + 1.0) - special.gammaln(j + nu_b + 1.0)
    return nu_b[..., 0] * half_log[..., 0] + special.logsumexp(log_terms, axis=-1)


def log_bessel_i(nu, x):
    """
    ln I_nu(x) for nu > -1 and x >= 0, vectorised over both arguments

    The defining series is used for x <= SERIES_SWITCH, the exponentially
    scaled scipy evaluation above it. At x = 0 the series gives 0 for nu = 0
    and -inf for nu > 0.
    """
    nu_arr = np.asarray(nu, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    _reject_nan('log_bessel_i', nu_arr, x_arr)
    if np.any(nu_arr <= -1):
        raise DomainError(f"bessel_i requires nu > -1, got {nu}")
    if np.any(x_arr < 0):
        raise DomainError(f"bessel_i requires x >= 0, got {x}")

    nu_b, x_b = np.broadcast_arrays(nu_arr, x_arr)
    out = np.empty(x_b.shape, dtype=float)

    zero = x_b == 0
    if np.any(zero & (nu_b < 0)):
        raise DomainError("I_nu(0) is unbounded for -1 < nu < 0")
    out[zero] = np.where(nu_b[zero] == 0, 0.0, -np.inf)

    small = (~zero) & (x_b <= SERIES_SWITCH)
    if np.any(small):
        out[small] = _log_bessel_series(nu_b[small], x_b[small])

    large = x_b > SERIES_SWITCH
    if np.any(large):
        out[large] = np.log(special.ive(nu_b[large], x_b[large])) + x_b[large]

    return float(out) if out.ndim == 0 else out


def bessel_i(nu, x, log_scale=None):
    """
    Modified Bessel function of the first kind I_nu(x)

    Args:
        nu: Order, nu > -1
        x: Argument, x >= 0
        log_scale: Force (True) or forbid (False) log-scale output; by default
            log scale is used only when the value would overflow

    Returns:
        SpecialValue
    """
    log_value = log_bessel_i(float(nu), float(x))
    if log_scale is None:
        log_scale = log_value > _LOG_OVERFLOW
    if log_scale:
        return SpecialValue(value=log_value, log_scale=True)
    if log_value > _LOG_OVERFLOW:
        raise DomainError(f"I_{nu}({x}) overflows; request log_scale=True")
    return SpecialValue(value=math.exp(log_value))


def _kummer_series(a, c, x):
    """
    Sum the 1F1 series for x >= 0 or terminating a

    Returns (signed mantissa, log shift) with 1F1 = mantissa * exp(log shift).
    """
    total = 1.0
    term = 1.0
    log_shift = 0.0
    for j in range(MAX_TERMS):
        ratio = (a + j) / (c + j) * x / (j + 1.0)
        term *= ratio
        total += term
        if abs(total) > _RESCALE:
            total /= _RESCALE
            term /= _RESCALE
            log_shift += _LOG_RESCALE
        if term == 0.0:
            return total, log_shift
        if abs(term) <= KUMMER_TOL * abs(total) and abs(ratio) < 1.0 and j + 1 > abs(a):
            return total, log_shift
    raise ConvergenceError(
        f"1F1({a}, {c}, {x}) did not converge within {MAX_TERMS} terms"
    )


def kummer_1f1(a, c, x):
    """
    Confluent hypergeometric function 1F1(a; c; x)

    Negative arguments are mapped through Kummer's transformation
    1F1(a, c, -x) = exp(-x) 1F1(c - a, c, x) unless a is a non-positive
    integer, in which case the series terminates and is summed directly.

    Args:
        a: Numerator parameter
        c: Denominator parameter, not zero or a negative integer
        x: Argument

    Returns:
        SpecialValue (log scale when the magnitude would overflow)
    """
    a, c, x = float(a), float(c), float(x)
    _reject_nan('kummer_1f1', a, c, x)
    if not all(math.isfinite(v) for v in (a, c, x)):
        raise DomainError(f"kummer_1f1 requires finite inputs, got ({a}, {c}, {x})")
    if _is_nonpositive_integer(c):
        raise DomainError(f"kummer_1f1 undefined for c = {c}")

    if x == 0.0 or a == 0.0:
        return SpecialValue(value=1.0)

    prefactor = 0.0
    if x < 0 and not _is_nonpositive_integer(a):
        prefactor = x
        a, x = c - a, -x

    total, log_shift = _kummer_series(a, c, x)
    logger.debug(f"1F1 series: a={a}, c={c}, x={x}, shift={log_shift}")

    if total == 0.0:
        return SpecialValue(value=0.0)

    sign = 1 if total > 0 else -1
    log_abs = math.log(abs(total)) + log_shift + prefactor
    if log_abs > _LOG_OVERFLOW:
        return SpecialValue(value=log_abs, log_scale=True, sign=sign)
    return SpecialValue(value=sign * math.exp(log_abs))


def kummer_shifted_polynomial(n, c, x):
    """
    exp(-x) 1F1(c + n, c, x) for integer n >= 0, as the finite sum
    sum_{j <= n} C(n, j) x^j / (c)_j
    """
    if int(n) != n or n < 0:
        raise DomainError(f"kummer_shifted_polynomial requires integer n >= 0, got {n}")
    _reject_nan('kummer_shifted_polynomial', c, x)
    if _is_nonpositive_integer(c):
        raise DomainError(f"kummer_shifted_polynomial undefined for c = {c}")
    j = np.arange(int(n) + 1, dtype=float)
    terms = special.comb(int(n), j) * np.power(float(x), j) / special.poch(float(c), j)
    return float(np.sum(terms))
