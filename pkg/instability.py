"""
Stochastic-instability diagnostics

Time-averaged occupancy of bounded sets, the CIR occupancy limit, and the
weak-limit check for the rescaled smoothed Bessel process.
"""
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
import pandas as pd
from scipy import integrate, stats

from bounds import EstimateWithError
from errors import DomainError
from logger import get_instability_logger
from model import require_cir
from specfun import reg_lower_inc_gamma

logger = get_instability_logger()

KS_MIN_SAMPLES = 10


@dataclass
class OccupancyCurve:
    """
    Running average (1/t) int_0^t P(|xi_s| < N) ds at selected times

    Attributes:
        times: Increasing evaluation times
        value: EstimateWithError per time
        N: Level of the bounded set
    """

    times: np.ndarray
    value: list
    N: float
    params_tag: str = ''
    seed: int = 0
    metadata: dict = field(default_factory=dict)

    @property
    def means(self):
        return np.array([v.mean for v in self.value])

    @property
    def stderrs(self):
        return np.array([v.stderr for v in self.value])

    @property
    def terminal(self):
        return self.value[-1]

    def is_decreasing(self):
        return bool(np.all(np.diff(self.means) < 0))

    def to_frame(self):
        return pd.DataFrame({
            'time': self.times,
            'occupancy_mean': self.means,
            'stderr': self.stderrs,
            'n': [v.n for v in self.value],
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
            'N': self.N,
            'params_tag': self.params_tag,
            'seed': self.seed,
            'metadata': self.metadata,
            'rows': self.to_frame().to_dict(orient='records'),
        }

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text + '\n', encoding='utf-8')
        return text


def occupancy_average(e, N, times):
    """
    Occupancy curve of an ensemble

    The per-time indicator |state| < N is averaged over paths; the time
    average uses the trapezoid rule on the stored grid. Standard errors come
    from the per-path time averages.

    Args:
        e: PathEnsemble
        N: Level, N > 0 (inf allowed)
        times: Positive grid times

    Returns:
        OccupancyCurve
    """
    if N is None or math.isnan(N) or N <= 0:
        raise DomainError(f"N must be positive, got {N}")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times <= 0):
        raise DomainError("occupancy times must be positive")
    if np.any(np.diff(times) <= 0):
        raise DomainError("occupancy times must be increasing")
    idx = e.grid.indices_of(times)

    inside = (np.abs(e.values) < N).astype(float)
    running = integrate.cumulative_trapezoid(inside, e.times, axis=1, initial=0.0)
    per_path = running[:, idx] / e.times[idx]
    values = []
    for column in per_path.T:
        values.append(EstimateWithError.from_samples(column))
    curve = OccupancyCurve(
        times=e.times[idx].copy(), value=values, N=float(N),
        params_tag=e.params_tag, seed=e.seed,
    )
    logger.debug(f"Occupancy N={N}: {curve.means}")
    return curve


def cir_occupancy_limit(p, N):
    """Long-run occupancy of [0, N) for CIR: P(2a/sigma^2, 2bN/sigma^2)"""
    require_cir(p, 'cir_occupancy_limit', 'occupancy_average (the squared Bessel limit is 0)')
    if N is None or math.isnan(N) or N < 0:
        raise DomainError(f"N must be nonnegative, got {N}")
    s2 = p.sigma ** 2
    return reg_lower_inc_gamma(2.0 * p.a / s2, 2.0 * p.b * N / s2)


def weak_limit_reference_cdf(t, x, c=1.0):
    """
    CDF of |Y_t| where Y_t^2 = (2c+1) t + 2 int_0^t Y dW, Y_0 = 0

    Y_t^2 is Gamma(shape (2c+1)/2, scale 2t); for c = 1, |Y_t| ~ sqrt(t chi^2_3).
    """
    if t is None or not (t > 0 and math.isfinite(t)):
        raise DomainError(f"t must be positive, got {t}")
    if c <= -0.5:
        raise DomainError(f"c must exceed -1/2, got {c}")
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)):
        raise DomainError("weak_limit_reference_cdf: NaN input")
    positive = np.maximum(x, 0.0)
    out = np.where(x > 0, reg_lower_inc_gamma(c + 0.5, positive ** 2 / (2.0 * t)), 0.0)
    return float(out) if out.ndim == 0 else out


def ks_statistic(samples, cdf):
    """
    Kolmogorov-Smirnov distance between the empirical CDF of samples and cdf

    Args:
        samples: At least KS_MIN_SAMPLES reals
        cdf: Vectorised reference CDF

    Returns:
        Statistic in [0, 1]
    """
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size < KS_MIN_SAMPLES:
        raise DomainError(f"KS test needs at least {KS_MIN_SAMPLES} samples, got {samples.size}")
    if np.any(np.isnan(samples)):
        raise DomainError("ks_statistic: NaN sample")
    return float(stats.kstest(samples, cdf).statistic)


def ks_critical_value(n, level=0.01):
    """Asymptotic one-sample KS critical value (1.63/sqrt(n) at the 1% level)"""
    return float(stats.kstwobign.isf(level) / math.sqrt(n))


def weak_limit_samples(e):
    """|V_T| / sqrt(T) at the last grid time"""
    return np.abs(e.terminal) / math.sqrt(e.grid.T)


class DriftLimits(NamedTuple):
    log_average: float
    first_moment_average: float


def drift_limit_constants(eps, c, x):
    """
    Drift averages of a(v) = c / sqrt(v^2 + eps^2) up to level x

    Returns:
        DriftLimits((1/log|x|) int_0^x a, (1/x) int_0^x v a(v) dv); both
        tend to c as x -> +inf and to -c as x -> -inf
    """
    if eps == 0:
        raise DomainError("eps must be nonzero")
    if abs(x) <= 1:
        raise DomainError(f"|x| must exceed 1, got {x}")
    e = abs(eps)
    integral = c * math.asinh(x / e)
    first_moment = c * (math.hypot(x, e) - e)
    return DriftLimits(
        log_average=integral / math.log(abs(x)),
        first_moment_average=first_moment / x,
    )
