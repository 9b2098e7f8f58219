"""
Parameter estimation from a discretely observed trajectory

sigma^2 from realized quadratic variation, the drift MLE for the squared
Bessel process, and ergodic time averages of 1/X.
"""
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import integrate

from errors import DomainError
from logger import get_estimate_logger
from simulate import TimeGrid

logger = get_estimate_logger()


class DiscreteTrajectory:
    """
    One path observed on a uniform grid

    Attributes:
        grid: Uniform TimeGrid
        values: Strictly positive observations, one per grid point
    """

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=float)
        if not grid.is_uniform:
            raise DomainError("trajectory grid must be uniform")
        if values.ndim != 1 or values.size != len(grid):
            raise DomainError(f"{values.size} values for a grid of {len(grid)} points")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise DomainError("trajectory values must be finite and strictly positive")
        self.grid = grid
        self.values = values

    @classmethod
    def from_csv(cls, path):
        """Read a two-column 't,value' CSV with header; the grid must be uniform"""
        path = Path(path)
        frame = pd.read_csv(path, float_precision='round_trip')
        missing = {'t', 'value'} - set(frame.columns)
        if missing:
            raise DomainError(f"{path}: missing column(s) {sorted(missing)}; expected header 't,value'")
        grid = TimeGrid.from_times(frame['t'].to_numpy(dtype=float))
        if not grid.is_uniform:
            raise DomainError(f"{path}: time column is not a uniform grid")
        logger.info(f"Loaded trajectory {path}: {len(grid)} points, T={grid.T}")
        return cls(grid, frame['value'].to_numpy(dtype=float))

    @classmethod
    def from_ensemble(cls, e, index=0):
        return cls(e.grid, e.values[index])

    def to_csv(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame({'t': self.grid.t, 'value': self.values}).to_csv(
            path, index=False, float_format='%.17g', encoding='utf-8', lineterminator='\n'
        )
        return path

    @property
    def T(self):
        return self.grid.T

    @property
    def n(self):
        """Number of increments"""
        return self.grid.n_steps


def sigma2_qv(traj):
    """
    Realized quadratic variation over the trapezoid integral of the path

    sum (Y_k - Y_{k-1})^2 / int_0^T Y ds
    """
    increments = np.diff(traj.values)
    qv = float(np.sum(increments ** 2))
    if qv == 0.0:
        raise DomainError("constant trajectory: quadratic variation is zero")
    occupation = float(integrate.trapezoid(traj.values, traj.grid.t))
    return qv / occupation


def mle_theta(traj, sigma):
    """
    Drift MLE theta_hat = 2 int dZ/Z / (sigma int ds/Z^2), Z = sqrt(Y)

    Both integrals use left-point sums.

    Args:
        traj: DiscreteTrajectory of the squared Bessel process
        sigma: Diffusion scale, > 0

    Returns:
        theta_hat
    """
    if sigma is None or not (sigma > 0 and math.isfinite(sigma)):
        raise DomainError(f"sigma must be positive, got {sigma}")
    z = np.sqrt(traj.values)
    left = z[:-1]
    numerator = 2.0 * np.sum(np.diff(z) / left)
    denominator = sigma * np.sum(traj.grid.dt() / left ** 2)
    if not (denominator > 0 and math.isfinite(denominator)):
        raise DomainError(f"degenerate MLE denominator {denominator}")
    return float(numerator / denominator)


def mle_a(traj, sigma):
    """a_hat = sigma theta_hat + sigma^2 / 4"""
    return sigma * mle_theta(traj, sigma) + sigma ** 2 / 4.0


def ergodic_time_average_inverse(traj):
    """(1/T) int_0^T dt / X_t by the trapezoid rule"""
    return float(integrate.trapezoid(1.0 / traj.values, traj.grid.t) / traj.T)


@dataclass(frozen=True)
class EstimationReport:
    sigma2: float
    theta: float
    a: float
    T: float
    n: int

    def to_dict(self):
        return asdict(self)

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text + '\n', encoding='utf-8')
        return text


def estimation_report(traj, sigma=None):
    """
    All estimates for one trajectory

    Args:
        traj: DiscreteTrajectory
        sigma: Known diffusion scale; when None the QV estimate is plugged in

    Returns:
        EstimationReport
    """
    sigma2 = sigma2_qv(traj)
    sigma_used = math.sqrt(sigma2) if sigma is None else float(sigma)
    theta = mle_theta(traj, sigma_used)
    report = EstimationReport(
        sigma2=sigma2,
        theta=theta,
        a=sigma_used * theta + sigma_used ** 2 / 4.0,
        T=traj.T,
        n=traj.n,
    )
    logger.debug(f"Estimation report: {report}")
    return report


def estimate_ensemble(e, sigma=None, workers=1):
    """
    Per-path estimates for every path of an ensemble

    Returns:
        DataFrame with columns path, sigma2, theta, a, inverse_average, T, n
    """
    def worker(index):
        traj = DiscreteTrajectory.from_ensemble(e, index)
        report = estimation_report(traj, sigma=sigma)
        row = report.to_dict()
        row['path'] = index
        row['inverse_average'] = ergodic_time_average_inverse(traj)
        return row

    indices = range(e.n_paths)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=int(workers)) as executor:
            rows = list(executor.map(worker, indices))
    else:
        rows = [worker(i) for i in indices]
    frame = pd.DataFrame(rows, columns=['path', 'sigma2', 'theta', 'a', 'inverse_average', 'T', 'n'])
    logger.info(f"Estimated {len(frame)} paths: median a_hat {frame['a'].median():.6g}")
    return frame
