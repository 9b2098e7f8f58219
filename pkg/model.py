"""
CIR and squared Bessel model parameters, transition densities and moments
"""
import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from scipy import integrate, stats
from scipy.special import roots_legendre

from errors import BesselRedirectError, DomainError
from logger import get_model_logger
from specfun import kummer_1f1, ln_gamma, log_bessel_i

logger = get_model_logger()

CDF_NODES = 20


def _check_finite(name, value):
    if value is None or not math.isfinite(value):
        raise DomainError(f"{name} must be a finite real, got {value}")


class FellerStatus(NamedTuple):
    """Feller condition flags: feller is 2a >= sigma^2, strict is 2a > sigma^2"""
    feller: bool
    strict: bool


@dataclass(frozen=True)
class CirParams:
    """
    Coefficients of dX = (a - b X) dt + sigma sqrt(X) dW, X_0 = x0

    Attributes:
        x0: Initial value (> 0)
        a: Drift level (> 0)
        b: Mean-reversion rate (>= 0; b = 0 is the squared Bessel case)
        sigma: Diffusion scale (> 0)
    """

    x0: float
    a: float
    b: float
    sigma: float

    def __post_init__(self):
        for name in ('x0', 'a', 'b', 'sigma'):
            _check_finite(name, getattr(self, name))
        if self.x0 <= 0:
            raise DomainError(f"x0 must be positive, got {self.x0}")
        if self.a <= 0:
            raise DomainError(f"a must be positive, got {self.a}")
        if self.b < 0:
            raise DomainError(f"b must be nonnegative, got {self.b}")
        if self.sigma <= 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")

    @property
    def nu(self):
        """Bessel index 2a/sigma^2 - 1"""
        return 2.0 * self.a / self.sigma ** 2 - 1.0

    @property
    def feller(self):
        return 2.0 * self.a >= self.sigma ** 2

    @property
    def feller_strict(self):
        return FellerStatus(
            feller=2.0 * self.a >= self.sigma ** 2,
            strict=2.0 * self.a > self.sigma ** 2,
        )

    @property
    def initial(self):
        return self.x0

    def to_bessel(self):
        """The b = 0 member with the same x0, a, sigma"""
        return BesselSqParams(y0=self.x0, a=self.a, sigma=self.sigma)

    def with_b(self, b):
        return CirParams(x0=self.x0, a=self.a, b=b, sigma=self.sigma)

    def tag(self):
        return f"cir(x0={self.x0!r},a={self.a!r},b={self.b!r},sigma={self.sigma!r})"


@dataclass(frozen=True)
class BesselSqParams:
    """Coefficients of dY = a dt + sigma sqrt(Y) dW, Y_0 = y0"""

    y0: float
    a: float
    sigma: float
    b = 0.0

    def __post_init__(self):
        for name in ('y0', 'a', 'sigma'):
            _check_finite(name, getattr(self, name))
        if self.y0 <= 0:
            raise DomainError(f"y0 must be positive, got {self.y0}")
        if self.a <= 0:
            raise DomainError(f"a must be positive, got {self.a}")
        if self.sigma <= 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")

    @property
    def x0(self):
        return self.y0

    @property
    def initial(self):
        return self.y0

    @property
    def nu(self):
        return 2.0 * self.a / self.sigma ** 2 - 1.0

    @property
    def feller(self):
        return 2.0 * self.a >= self.sigma ** 2

    @property
    def feller_strict(self):
        return FellerStatus(
            feller=2.0 * self.a >= self.sigma ** 2,
            strict=2.0 * self.a > self.sigma ** 2,
        )

    def as_cir(self):
        return CirParams(x0=self.y0, a=self.a, b=0.0, sigma=self.sigma)

    def tag(self):
        return f"besq(y0={self.y0!r},a={self.a!r},sigma={self.sigma!r})"


ModelParams = Union[CirParams, BesselSqParams]


def as_cir(p):
    """View any model parameters as CirParams (b = 0 for squared Bessel)"""
    if isinstance(p, BesselSqParams):
        return p.as_cir()
    if isinstance(p, CirParams):
        return p
    raise DomainError(f"Expected CirParams or BesselSqParams, got {type(p).__name__}")


def is_bessel(p):
    return isinstance(p, BesselSqParams) or as_cir(p).b == 0


def require_cir(p, operation, counterpart):
    if isinstance(p, BesselSqParams) or p.b == 0:
        raise BesselRedirectError(operation, counterpart)
    return p


def require_bessel(p):
    if isinstance(p, BesselSqParams):
        return p
    if isinstance(p, CirParams) and p.b == 0:
        return p.to_bessel()
    raise DomainError("squared Bessel operation requires BesselSqParams (or CirParams with b = 0)")


def _check_time(t, allow_zero=False):
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(t_arr)) or np.any(~np.isfinite(t_arr)):
        raise DomainError(f"time must be finite, got {t}")
    if allow_zero:
        if np.any(t_arr < 0):
            raise DomainError(f"time must be nonnegative, got {t}")
    elif np.any(t_arr <= 0):
        raise DomainError(f"density requires t > 0, got {t}")
    return t_arr


def _as_output(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def _one_minus_exp(b, t):
    return -np.expm1(-b * t)


def _phi1(z):
    # (1 - e^{-z}) / z, equal to 1 at z = 0
    z = np.asarray(z, dtype=float)
    safe = np.where(z == 0, 1.0, z)
    return np.where(z == 0, 1.0, -np.expm1(-safe) / safe)


def _phi2(z):
    # (e^{-z} - 1 + z) / z^2, equal to 1/2 at z = 0
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-4
    safe = np.where(small, 1.0, z)
    series = 0.5 - z / 6.0 + z * z / 24.0
    return np.where(small, series, (np.expm1(-safe) + safe) / (safe * safe))


def scale_and_center(p, t):
    """
    Transition scale c(t) and decayed initial value m(t)

    X_t / c(t) is Gamma(nu + 1 + P) with P Poisson of mean m(t) / c(t).
    For b = 0, c(t) = sigma^2 t / 2 and m(t) = y0.
    """
    cir = as_cir(p)
    t = np.asarray(t, dtype=float)
    c = 0.5 * cir.sigma ** 2 * t * _phi1(cir.b * t)
    m = cir.x0 * np.exp(-cir.b * t)
    return _as_output(c), _as_output(m)


def _log_transition_density(x, c, m, nu):
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)):
        raise DomainError("density: NaN input")
    out = np.zeros(x.shape, dtype=float)
    pos = x > 0
    if np.any(pos):
        xp = x[pos]
        z = 2.0 * np.sqrt(xp * m) / c
        # (x + m)/c - z folded into a square to avoid cancellation for small c
        log_p = (
            -math.log(c)
            - (np.sqrt(xp) - math.sqrt(m)) ** 2 / c
            + 0.5 * nu * (np.log(xp) - math.log(m))
            + (log_bessel_i(nu, z) - z)
        )
        out[pos] = np.exp(log_p)
    return _as_output(out)


def cir_density(p, t, x):
    """
    Transition density p_t(x) of the CIR process started at x0

    Args:
        p: CirParams with b > 0
        t: Time, t > 0
        x: Evaluation point(s); zero density for x <= 0

    Returns:
        Density value(s)
    """
    require_cir(p, 'cir_density', 'bessel_sq_density')
    _check_time(t)
    c, m = scale_and_center(p, float(t))
    return _log_transition_density(x, c, m, p.nu)


def bessel_sq_density(p, t, x):
    """Transition density g_t(x) of the squared Bessel process started at y0"""
    p = require_bessel(p)
    _check_time(t)
    c, m = scale_and_center(p, float(t))
    return _log_transition_density(x, c, m, p.nu)


def cir_stationary_density(p, x):
    """Gamma(shape 2a/sigma^2, rate 2b/sigma^2) density; zero for x <= 0"""
    if isinstance(p, BesselSqParams) or p.b == 0:
        raise DomainError("squared Bessel process has no stationary law (b = 0)")
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)):
        raise DomainError("cir_stationary_density: NaN input")
    law = stats.gamma(a=2.0 * p.a / p.sigma ** 2, scale=p.sigma ** 2 / (2.0 * p.b))
    with np.errstate(divide='ignore'):
        out = np.where(x > 0, law.pdf(np.where(x > 0, x, 1.0)), 0.0)
    return _as_output(out)


def transition_density(p, t, x):
    """Density of X_t for either model"""
    if is_bessel(p):
        return bessel_sq_density(p, t, x)
    return cir_density(p, t, x)


def _check_order(k):
    if k not in (1, 2, 3):
        raise DomainError(f"moment order must be 1, 2 or 3, got {k}")


def cir_moment(p, t, k):
    """
    Closed-form E X_t^k for k = 1, 2, 3

    Args:
        p: CirParams with b > 0
        t: Time(s), t >= 0
        k: Moment order

    Returns:
        Moment value(s)
    """
    require_cir(p, 'cir_moment', 'bessel_sq_moment')
    _check_order(k)
    t = _check_time(t, allow_zero=True)
    x0, a, b, s2 = p.x0, p.a, p.b, p.sigma ** 2
    e = np.exp(-b * t)
    om = _one_minus_exp(b, t)

    if k == 1:
        value = x0 * e + (a / b) * om
    elif k == 2:
        value = (
            x0 * (s2 + 2 * a) / b * e * om
            + a * (s2 + 2 * a) / (2 * b ** 2) * om ** 2
            + x0 ** 2 * e ** 2
        )
    else:
        # e^{-bt} - 2e^{-2bt} + e^{-3bt} = e^{-bt}(1 - e^{-bt})^2
        value = (
            x0 ** 3 * e ** 3
            + (1 + 1.5 * s2 / a + 0.5 * s2 ** 2 / a ** 2)
            * (a ** 3 / b ** 3 * om ** 3 + 3 * x0 * a ** 2 / b ** 2 * e * om ** 2)
            + 3 * x0 ** 2 * a / b * (1 + s2 / a) * e ** 2 * om
        )
    return _as_output(value)


def bessel_sq_moment(p, t, k):
    """Closed-form E Y_t^k for k = 1, 2, 3"""
    p = require_bessel(p)
    _check_order(k)
    t = _check_time(t, allow_zero=True)
    y0, a, s2 = p.y0, p.a, p.sigma ** 2

    if k == 1:
        value = y0 + a * t
    elif k == 2:
        value = y0 ** 2 + (s2 / 2 + a) * (2 * y0 * t + a * t ** 2)
    else:
        value = (
            (a * s2 ** 2 / 2 + 1.5 * a ** 2 * s2 + a ** 3) * t ** 3
            + 3 * (y0 * s2 ** 2 / 2 + 1.5 * a * y0 * s2 + a ** 2 * y0) * t ** 2
            + 3 * y0 ** 2 * (s2 + a) * t
            + y0 ** 3
        )
    return _as_output(value)


def moment(p, t, k):
    """E X_t^k for either model"""
    if is_bessel(p):
        return bessel_sq_moment(p, t, k)
    return cir_moment(p, t, k)


def bessel_sq_moment_p(p, t, pw):
    """
    E Y_t^pw for real pw >= -2a/sigma^2 through the 1F1 representation

    At pw = -2a/sigma^2 the moment diverges and inf is returned.

    Args:
        p: BesselSqParams
        t: Time, t > 0
        pw: Real power

    Returns:
        Moment value
    """
    p = require_bessel(p)
    _check_time(t)
    if pw is None or math.isnan(pw):
        raise DomainError("bessel_sq_moment_p: NaN power")
    alpha = 2.0 * p.a / p.sigma ** 2
    threshold = -alpha
    if math.isclose(pw, threshold, rel_tol=1e-12, abs_tol=1e-15):
        logger.warning(f"E Y^{pw} diverges at the threshold -2a/sigma^2 = {threshold}")
        return math.inf
    if pw < threshold:
        raise DomainError(f"E Y^p requires p >= -2a/sigma^2 = {threshold}, got {pw}")
    if pw == 0:
        return 1.0

    mu = 2.0 * p.y0 / (p.sigma ** 2 * t)
    log_value = (
        pw * math.log(p.sigma ** 2 * t / 2.0)
        + ln_gamma(alpha + pw) - ln_gamma(alpha)
        - mu
        + kummer_1f1(alpha + pw, alpha, mu).log()
    )
    logger.debug(f"E Y^{pw} at t={t}: log value {log_value}")
    return math.exp(log_value)


def integrated_mean(p, t):
    """
    Integral of E X_s over [0, t]

    Equals (1/b)(x0 - a/b)(1 - e^{-bt}) + (a/b) t for b > 0 and
    x0 t + a t^2 / 2 for b = 0; evaluated in a form continuous in b.
    """
    cir = as_cir(p)
    t = _check_time(t, allow_zero=True)
    z = cir.b * t
    value = cir.x0 * t * _phi1(z) + cir.a * t ** 2 * _phi2(z)
    return _as_output(value)


def ergodic_inverse_mean(p):
    """
    Space average of 1/x under the stationary law, b / (a - sigma^2/2)

    Requires the strict Feller condition 2a > sigma^2. Returns 0 for b = 0.
    """
    cir = as_cir(p)
    if not cir.feller_strict.strict:
        raise DomainError(
            f"ergodic inverse mean requires 2a > sigma^2 (a={cir.a}, sigma={cir.sigma})"
        )
    if cir.b == 0:
        return 0.0
    return cir.b / (cir.a - cir.sigma ** 2 / 2.0)


def _gauss_legendre(f, lo, hi, nodes, weights, max_width):
    n_sub = max(1, int(math.ceil((hi - lo) / max_width)))
    edges = np.linspace(lo, hi, n_sub + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    points = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    values = np.asarray(f(points)).reshape(n_sub, -1)
    return float(np.sum(half[:, None] * weights[None, :] * values))


def transition_cdf(p, t, x):
    """
    P(X_t <= x) by quadrature of the transition density

    The first panel [0, min x] is integrated adaptively; the gaps between
    consecutive sorted points use Gauss-Legendre panels.

    Args:
        p: Model parameters (either model)
        t: Time, t > 0
        x: Evaluation point(s)

    Returns:
        CDF value(s) in [0, 1]
    """
    _check_time(t)

    def density(v):
        return transition_density(p, t, v)

    xs = np.asarray(x, dtype=float)
    if np.any(np.isnan(xs)):
        raise DomainError("transition_cdf: NaN input")
    flat = np.atleast_1d(xs).ravel()
    order = np.argsort(flat, kind='stable')
    sorted_x = np.maximum(flat[order], 0.0)

    variance = moment(p, t, 2) - moment(p, t, 1) ** 2
    max_width = 0.25 * math.sqrt(max(variance, 1e-300))
    nodes, weights = roots_legendre(CDF_NODES)

    cumulative = np.zeros_like(sorted_x)
    total = 0.0
    previous = 0.0
    for i, xi in enumerate(sorted_x):
        if xi > previous:
            if previous == 0.0:
                total += integrate.quad(density, 0.0, xi, limit=200)[0]
            else:
                total += _gauss_legendre(density, previous, xi, nodes, weights, max_width)
            previous = xi
        cumulative[i] = total

    out = np.empty_like(cumulative)
    out[order] = np.clip(cumulative, 0.0, 1.0)
    return _as_output(out.reshape(xs.shape))
