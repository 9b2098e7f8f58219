"""
Growth and convergence-rate bounds for CIR / squared Bessel processes,
Monte Carlo estimators of the bounded quantities, and certification reports
"""
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import integrate

from errors import DomainError
from logger import get_bounds_logger
from model import (
    as_cir, integrated_mean, moment, require_bessel, require_cir,
)
from simulate import check_coupled

logger = get_bounds_logger()

DEFAULT_Z = 3.0


@dataclass(frozen=True)
class EstimateWithError:
    """Monte Carlo mean with standard error sample_std / sqrt(n)"""

    mean: float
    stderr: float
    n: int

    @classmethod
    def from_samples(cls, samples):
        samples = np.asarray(samples, dtype=float).ravel()
        if samples.size < 2:
            raise DomainError(f"need at least 2 samples, got {samples.size}")
        if not np.all(np.isfinite(samples)):
            raise DomainError("samples must be finite")
        return cls(
            mean=float(samples.mean()),
            stderr=float(samples.std(ddof=1) / math.sqrt(samples.size)),
            n=int(samples.size),
        )

    def upper(self, z=DEFAULT_Z):
        return self.mean + z * self.stderr

    def lower(self, z=DEFAULT_Z):
        return self.mean - z * self.stderr

    def as_dict(self):
        return {'mean': self.mean, 'stderr': self.stderr, 'n': self.n}


def _column_estimates(samples):
    """EstimateWithError for every column of an (n_paths, n_times) array"""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[0]
    if n < 2:
        raise DomainError(f"need at least 2 paths, got {n}")
    means = samples.mean(axis=0)
    errs = samples.std(axis=0, ddof=1) / math.sqrt(n)
    return [EstimateWithError(float(m), float(s), n) for m, s in zip(means, errs)]


@dataclass
class BoundReport:
    """
    Per-time comparison of an empirical quantity with a closed-form bound

    For an upper bound the check at each time is
    mean <= bound + z * stderr + budget; a lower bound flips the inequality.
    """

    label: str
    times: np.ndarray
    empirical: list
    bound: np.ndarray
    z: float = DEFAULT_Z
    budget: np.ndarray = None
    kind: str = 'upper'
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.bound = np.broadcast_to(np.asarray(self.bound, dtype=float), self.times.shape).copy()
        if self.budget is None:
            self.budget = np.zeros_like(self.times)
        self.budget = np.broadcast_to(np.asarray(self.budget, dtype=float), self.times.shape).copy()
        if len(self.empirical) != self.times.size:
            raise DomainError("one empirical estimate per time is required")
        if self.kind not in ('upper', 'lower'):
            raise DomainError(f"kind must be 'upper' or 'lower', got {self.kind}")

    @property
    def means(self):
        return np.array([e.mean for e in self.empirical])

    @property
    def stderrs(self):
        return np.array([e.stderr for e in self.empirical])

    @property
    def slack_in_stderr(self):
        """(bound - mean) / stderr for upper bounds, (mean - bound) / stderr for lower"""
        gap = self.bound - self.means if self.kind == 'upper' else self.means - self.bound
        with np.errstate(divide='ignore', invalid='ignore'):
            slack = np.where(self.stderrs > 0, gap / self.stderrs,
                             np.where(gap >= 0, np.inf, -np.inf))
        return slack

    @property
    def passes(self):
        allowance = self.z * self.stderrs + self.budget
        if self.kind == 'upper':
            return self.means <= self.bound + allowance
        return self.means >= self.bound - allowance

    @property
    def passed(self):
        return bool(np.all(self.passes))

    def to_frame(self):
        return pd.DataFrame({
            'time': self.times,
            'empirical_mean': self.means,
            'stderr': self.stderrs,
            'bound': self.bound,
            'budget': self.budget,
            'slack_in_stderr': self.slack_in_stderr,
            'pass': self.passes,
        })

    def to_csv(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(
            path, index=False, float_format='%.17g', encoding='utf-8', lineterminator='\n'
        )
        return path

    def to_dict(self):
        return {
            'label': self.label,
            'kind': self.kind,
            'z': self.z,
            'pass': self.passed,
            'metadata': self.metadata,
            'rows': [
                {
                    'time': float(t), 'empirical_mean': e.mean, 'stderr': e.stderr, 'n': e.n,
                    'bound': float(bd), 'budget': float(bg), 'pass': bool(ok),
                }
                for t, e, bd, bg, ok in zip(self.times, self.empirical, self.bound,
                                            self.budget, self.passes)
            ],
        }

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text + '\n', encoding='utf-8')
        return text


def certify(label, times, empirical, bound, z=DEFAULT_Z, budget=None, kind='upper', **metadata):
    """Build a BoundReport and log its verdict"""
    report = BoundReport(label=label, times=times, empirical=list(empirical), bound=bound,
                         z=z, budget=budget, kind=kind, metadata=metadata)
    verdict = 'PASS' if report.passed else 'FAIL'
    logger.info(f"{label}: {verdict} (min slack {np.min(report.slack_in_stderr):.3f} stderr)")
    return report


# ---------------------------------------------------------------------------
# Growth bounds
# ---------------------------------------------------------------------------

def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.isnan(t)) or np.any(t < 0):
        raise DomainError(f"time must be nonnegative, got {t}")
    return t


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


def growth_bound_gronwall(p, t):
    """
    2((x0 + a t)^2 + 2 sigma^2 t) exp(4 sigma^2 t), valid for both models
    """
    cir = as_cir(p)
    t = _check_t(t)
    s2 = cir.sigma ** 2
    return _out(2.0 * ((cir.x0 + cir.a * t) ** 2 + 2.0 * s2 * t) * np.exp(4.0 * s2 * t))


def growth_bound_moment(p, t):
    """
    Upper bound on E sup_{s<=t} (X_s + b int_0^s X du)^2 for b > 0

    2(x0 + a t)^2 + (8 sigma^2 / b)(x0 - a/b)(1 - e^{-bt}) + (8 sigma^2 a / b) t,
    evaluated as 2(x0 + a t)^2 + 8 sigma^2 int_0^t E X_s ds.
    """
    require_cir(p, 'growth_bound_moment', 'bessel_growth_bounds')
    t = _check_t(t)
    return _out(2.0 * (p.x0 + p.a * t) ** 2 + 8.0 * p.sigma ** 2 * integrated_mean(p, t))


def growth_lower_bound_moment(p, t):
    """E X_t^2 + (b int_0^t E X_s ds)^2, a lower bound for the same functional"""
    cir = as_cir(p)
    t = _check_t(t)
    return _out(moment(cir, t, 2) + (cir.b * integrated_mean(cir, t)) ** 2)


def bessel_growth_bounds(p, t):
    """
    Upper and lower bounds on E sup_{s<=t} Y_s^2

    Returns:
        (2(y0 + a t)^2 + 4 sigma^2 (2 y0 t + a t^2),
         (y0 + a t)^2 + (sigma^2 / 2)(2 y0 t + a t^2))
    """
    p = require_bessel(p)
    t = _check_t(t)
    s2 = p.sigma ** 2
    level = p.y0 + p.a * t
    spread = 2.0 * p.y0 * t + p.a * t ** 2
    return _out(2.0 * level ** 2 + 4.0 * s2 * spread), _out(level ** 2 + 0.5 * s2 * spread)


def gronwall_is_tighter(p, t):
    """Whether the Gronwall bound lies below the squared Bessel upper bound at t"""
    upper, _ = bessel_growth_bounds(require_bessel(p), t)
    return np.asarray(growth_bound_gronwall(p, t)) <= np.asarray(upper)


# ---------------------------------------------------------------------------
# Convergence-rate bounds
# ---------------------------------------------------------------------------

def _check_pair(pn, p0, T):
    pn, p0 = as_cir(pn), as_cir(p0)
    if pn.x0 != p0.x0:
        raise DomainError(f"models must share x0 ({pn.x0} vs {p0.x0})")
    if not (T > 0 and math.isfinite(T)):
        raise DomainError(f"horizon T must be positive, got {T}")
    return pn, p0


def _l1_inner(pn, p0, T):
    big_a2 = integrated_mean(p0, T)
    return (abs(pn.a - p0.a) * T
            + abs(pn.b - p0.b) * big_a2
            + abs(pn.sigma - p0.sigma) * math.sqrt(big_a2))


def rate_bound_l1(pn, p0, T):
    """
    Bound on sup_{t<=T} E|X_n(t) - X_0(t)|

    e^{b_n T}(|a_n - a_0| T + |b_n - b_0| A_0^2(T) + |sigma_n - sigma_0| A_0(T)),
    where A_0^2(T) = int_0^T E X_0 ds (x0 T + a_0 T^2 / 2 when b_0 = 0).
    """
    pn, p0 = _check_pair(pn, p0, T)
    return math.exp(pn.b * T) * _l1_inner(pn, p0, T)


def _phi1(z):
    return 1.0 if z == 0 else -math.expm1(-z) / z


def third_moment_envelope(p, T):
    """
    sup_{t<=T} bound on E X_t^3

    For b > 0 this is R(T) with the powers of (1 - e^{-bT}); for b = 0 it is
    the squared Bessel third moment at T. One expression covers both since
    a (1 - e^{-bT}) / b -> a T.
    """
    cir = as_cir(p)
    x0, a, s2 = cir.x0, cir.a, cir.sigma ** 2
    level = a * T * _phi1(cir.b * T)
    k = 1.0 + 1.5 * s2 / a + 0.5 * s2 ** 2 / a ** 2
    return x0 ** 3 + k * (level ** 3 + 3.0 * x0 * level ** 2) + 3.0 * x0 ** 2 * (a + s2) * T * _phi1(cir.b * T)


def second_moment_envelope(p, T):
    """D^2(T) for b > 0, E_0^2(T) for b = 0"""
    cir = as_cir(p)
    x0, a, s2 = cir.x0, cir.a, cir.sigma ** 2
    level = a * T * _phi1(cir.b * T)
    return x0 * (s2 + 2.0 * a) * T * _phi1(cir.b * T) + (s2 + 2.0 * a) / (2.0 * a) * level ** 2 + x0 ** 2


def rate_bound_l2_distributional(pn, p0, T):
    """
    Bound on sup_{t<=T} E(X_n(t) - X_0(t))^2 through third moments

    2 (R_n(T) + R_0(T))^{1/2} (L1 bound)^{1/2}
    """
    pn, p0 = _check_pair(pn, p0, T)
    envelope = third_moment_envelope(pn, T) + third_moment_envelope(p0, T)
    return 2.0 * math.sqrt(envelope) * math.sqrt(rate_bound_l1(pn, p0, T))


def _f_exact(pn, p0, T):
    def integrand(s):
        second_n = moment(pn, s, 2)
        return second_n + math.sqrt(moment(p0, s, 2) * second_n)
    return integrate.quad(integrand, 0.0, T, limit=200)[0]


def rate_bound_l2_pathwise(pn, p0, T, exact_f=False):
    """
    Pathwise bound on sup_{t<=T} E(X_n(t) - X_0(t))^2

    With K = 2|a_n - a_0| + sigma_0^2 + 2 sigma_0 |sigma_n - sigma_0| and I the
    L1 inner term:
      b_0 > 0: e^{(b_n+b_0)T} K I T + e^{b_0 T}(2|b_n - b_0| F + (sigma_n - sigma_0)^2 A_n^2)
      b_0 = 0: K I T e^{b_n T} + 2 b_n F + (sigma_n - sigma_0)^2 A_n^2
    F is T(D_n^2 + D_n D_0) unless exact_f, which integrates the moment formulas.
    """
    pn, p0 = _check_pair(pn, p0, T)
    k = 2.0 * abs(pn.a - p0.a) + p0.sigma ** 2 + 2.0 * p0.sigma * abs(pn.sigma - p0.sigma)
    inner = _l1_inner(pn, p0, T)
    an2 = integrated_mean(pn, T)
    if exact_f:
        f = _f_exact(pn, p0, T)
    else:
        dn2 = second_moment_envelope(pn, T)
        f = T * (dn2 + math.sqrt(dn2 * second_moment_envelope(p0, T)))
    tail = 2.0 * abs(pn.b - p0.b) * f + (pn.sigma - p0.sigma) ** 2 * an2
    if p0.b > 0:
        return math.exp((pn.b + p0.b) * T) * k * inner * T + math.exp(p0.b * T) * tail
    return k * inner * T * math.exp(pn.b * T) + tail


def approx_bessel_bound(p, b_n, T):
    """e^{b_n T} b_n T (x0 + a T / 2): CIR with rate b_n against its b = 0 limit"""
    cir = as_cir(p)
    if b_n < 0 or T <= 0:
        raise DomainError(f"need b_n >= 0 and T > 0, got b_n={b_n}, T={T}")
    return math.exp(b_n * T) * b_n * T * (cir.x0 + cir.a * T / 2.0)


def bn_tn_schedule(n):
    """b_n = 1/n, T_n = log log n (n >= 3)"""
    if n < 3:
        raise DomainError(f"schedule needs n >= 3, got {n}")
    return 1.0 / n, math.log(math.log(n))


def schedule_bound(p, n):
    """L1 bound along the (1/n, log log n) schedule toward the b = 0 limit of p"""
    b_n, t_n = bn_tn_schedule(n)
    cir = as_cir(p)
    return rate_bound_l1(cir.with_b(b_n), cir.with_b(0.0), t_n)


# ---------------------------------------------------------------------------
# Monte Carlo estimators
# ---------------------------------------------------------------------------

def mc_distance_curve(e1, e2, power=1):
    """Per-time E|X1 - X2|^power estimates for coupled ensembles"""
    check_coupled(e1, e2)
    diff = np.abs(e1.values - e2.values) ** power
    return _column_estimates(diff)


def _sup_of_curve(curve, times):
    means = np.array([e.mean for e in curve])
    idx = int(np.argmax(means))
    return curve[idx], float(times[idx])


def mc_sup_l1_distance(e1, e2):
    """
    max over grid times of the MC mean of |X1 - X2|

    Returns:
        (EstimateWithError at the argmax time, argmax time)
    """
    return _sup_of_curve(mc_distance_curve(e1, e2, power=1), e1.times)


def mc_sup_l2_distance(e1, e2):
    """max over grid times of the MC mean of (X1 - X2)^2"""
    return _sup_of_curve(mc_distance_curve(e1, e2, power=2), e1.times)


def _running_sup_squared(values):
    return np.maximum.accumulate(values, axis=1) ** 2


def mc_running_sup_second_moment(e, p):
    """
    E sup_{s<=t} (X_s + b int_0^s X du)^2 at every grid time

    The inner integral uses the trapezoid rule on the stored grid.
    """
    b = as_cir(p).b
    integral = integrate.cumulative_trapezoid(e.values, e.times, axis=1, initial=0.0)
    shifted = e.values + b * integral
    # the functional is nonnegative, so sup of the square is the square of sup |.|
    return _column_estimates(np.maximum.accumulate(np.abs(shifted), axis=1) ** 2)


def mc_sup_second_moment(e, p):
    """E sup_{s<=T} (X_s + b int_0^s X du)^2 over the grid"""
    return mc_running_sup_second_moment(e, p)[-1]


def mc_running_sup_square(e):
    """E (sup_{s<=t} X_s)^2 at every grid time"""
    return _column_estimates(_running_sup_squared(e.values))


def mc_sup_square(e):
    """E (sup_s X_s)^2 over the grid"""
    return mc_running_sup_square(e)[-1]


def discretization_budget(coarse, fine):
    """2 |fine - coarse| per time, from estimates or plain means"""
    def means(values):
        return np.array([v.mean if isinstance(v, EstimateWithError) else float(v) for v in values])
    coarse_m, fine_m = means(coarse), means(fine)
    if coarse_m.shape != fine_m.shape:
        raise DomainError("coarse and fine estimates must be aligned")
    return 2.0 * np.abs(fine_m - coarse_m)


def linearity_spread(b_values, estimates):
    """max / min of estimate / b; 1 means exact proportionality"""
    b_values = np.asarray(b_values, dtype=float)
    est = np.array([e.mean if isinstance(e, EstimateWithError) else float(e) for e in estimates])
    if np.any(b_values <= 0) or np.any(est <= 0):
        raise DomainError("linearity spread needs positive rates and estimates")
    ratios = est / b_values
    return float(ratios.max() / ratios.min())
