"""
Path simulation for square-root diffusions

Exact transition sampling, coupled full-truncation Euler runs sharing one
Brownian path per trajectory, and the smoothed Bessel SDE
dV = c / sqrt(V^2 + eps^2) dt + dW.

Every path owns a counter-based stream keyed by (seed, path index), so an
ensemble is a pure function of its inputs whatever the worker count.
"""
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import special, stats

from errors import CouplingError, DomainError
from logger import get_simulate_logger
from model import (
    BesselSqParams, CirParams, as_cir, require_bessel, require_cir, scale_and_center,
)

logger = get_simulate_logger()

# Paths per work unit and steps per random-number block; fixed so that the
# assembled ensemble never depends on scheduling
CHUNK_PATHS = 512
TIME_BLOCK = 1024

BINARY_MAGIC = b'SQDE'
BINARY_VERSION = 1
BINARY_HEADER = np.dtype([
    ('magic', 'S4'),
    ('version', '<u4'),
    ('n_paths', '<u8'),
    ('n_times', '<u8'),
    ('seed', '<u8'),
    ('tag_len', '<u4'),
])

_GRID_RTOL = 1e-12
_TINY_UNIFORM = 2.0 ** -54


def _grid_atol(t_end):
    return 64.0 * np.finfo(float).eps * max(1.0, t_end)


class TimeGrid:
    """
    Strictly increasing time points starting at 0

    Attributes:
        t: Time points (read-only float array)
        uniform_step: Common step when the grid is uniform, else None
    """

    def __init__(self, t, uniform_step=None):
        t = np.array(t, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise DomainError("TimeGrid needs at least two time points")
        if not np.all(np.isfinite(t)):
            raise DomainError("TimeGrid times must be finite")
        if t[0] != 0.0:
            raise DomainError(f"TimeGrid must start at 0, got {t[0]}")
        diffs = np.diff(t)
        if np.any(diffs <= 0):
            raise DomainError("TimeGrid times must be strictly increasing")
        if uniform_step is not None:
            if uniform_step <= 0:
                raise DomainError("uniform_step must be positive")
            if not np.allclose(diffs, uniform_step, rtol=_GRID_RTOL, atol=_grid_atol(t[-1])):
                raise DomainError("grid differences do not match uniform_step")
        t.setflags(write=False)
        self.t = t
        self.uniform_step = None if uniform_step is None else float(uniform_step)

    @classmethod
    def uniform(cls, T, n_steps):
        """n_steps equal steps on [0, T]"""
        if T <= 0 or not math.isfinite(T):
            raise DomainError(f"horizon T must be positive, got {T}")
        if int(n_steps) != n_steps or n_steps < 1:
            raise DomainError(f"n_steps must be a positive integer, got {n_steps}")
        n_steps = int(n_steps)
        h = T / n_steps
        t = np.arange(n_steps + 1, dtype=float) * h
        t[-1] = T
        return cls(t, uniform_step=h)

    @classmethod
    def from_times(cls, times):
        """Grid from explicit times; uniform_step is detected"""
        t = np.asarray(times, dtype=float)
        grid = cls(t)
        diffs = np.diff(grid.t)
        h = (grid.t[-1] - grid.t[0]) / diffs.size
        if np.allclose(diffs, h, rtol=_GRID_RTOL, atol=_grid_atol(grid.t[-1])):
            grid.uniform_step = h
        return grid

    @classmethod
    def graded(cls, T, initial_step, max_step, growth=1.001):
        """
        Steps growing geometrically from initial_step up to max_step

        The last step is shortened to land on T.
        """
        if not (T > 0 and initial_step > 0 and max_step >= initial_step and growth >= 1):
            raise DomainError(
                f"graded grid needs T > 0, 0 < initial_step <= max_step, growth >= 1 "
                f"(got T={T}, initial_step={initial_step}, max_step={max_step}, growth={growth})"
            )
        times = [0.0]
        h = float(initial_step)
        while times[-1] < T:
            nxt = times[-1] + h
            if nxt >= T or T - nxt < 1e-9 * h:
                nxt = T
            times.append(nxt)
            h = min(h * growth, max_step)
        return cls.from_times(times)

    @property
    def T(self):
        return float(self.t[-1])

    @property
    def n_steps(self):
        return self.t.size - 1

    @property
    def is_uniform(self):
        return self.uniform_step is not None

    def dt(self):
        """Step sizes"""
        return np.diff(self.t)

    def indices_of(self, times):
        """
        Grid indices of the requested times

        Raises:
            DomainError if a time is not on the grid
        """
        times = np.atleast_1d(np.asarray(times, dtype=float))
        idx = np.searchsorted(self.t, times)
        out = []
        tol = _grid_atol(self.T) + 1e-9 * self.T
        for want, i in zip(times, idx):
            candidates = [j for j in (i - 1, i) if 0 <= j < self.t.size]
            best = min(candidates, key=lambda j: abs(self.t[j] - want))
            if abs(self.t[best] - want) > tol:
                raise DomainError(f"time {want} is not on the grid")
            out.append(best)
        return np.asarray(out, dtype=int)

    def including(self, times):
        """
        Grid with the given times inserted

        Existing points closer than one tenth of the local step to an
        inserted time are dropped, so the inserted times land exactly.
        """
        extra = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(extra <= 0) or np.any(extra > self.T):
            raise DomainError(f"inserted times must lie in (0, {self.T}]")
        keep = np.ones(self.t.size, dtype=bool)
        steps = np.append(self.dt(), self.dt()[-1])
        for want in extra:
            near = np.abs(self.t - want) < 0.1 * steps
            near[0] = False
            keep &= ~near
        merged = np.union1d(self.t[keep], extra)
        return TimeGrid.from_times(merged)

    def subsample(self, indices):
        indices = np.asarray(indices, dtype=int)
        step = None
        if self.uniform_step is not None and indices.size > 1:
            gaps = np.diff(indices)
            if np.all(gaps == gaps[0]):
                step = self.uniform_step * gaps[0]
        return TimeGrid(self.t[indices], uniform_step=step)

    def same_as(self, other):
        return self.t.shape == other.t.shape and np.array_equal(self.t, other.t)

    def __len__(self):
        return self.t.size

    def __repr__(self):
        kind = f"uniform h={self.uniform_step!r}" if self.is_uniform else "nonuniform"
        return f"TimeGrid(n_steps={self.n_steps}, T={self.T!r}, {kind})"


class RngStream:
    """
    Counter-based random stream for one path

    Philox keyed by (seed, stream_id); identical keys replay identical draws.
    """

    def __init__(self, seed, stream_id=0):
        if not (0 <= int(seed) < 2 ** 64) or not (0 <= int(stream_id) < 2 ** 64):
            raise DomainError("seed and stream_id must be 64-bit unsigned integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        self.generator = np.random.Generator(np.random.Philox(key=key))

    def uniform(self, size=None):
        """Uniforms on (0, 1)"""
        u = np.asarray(self.generator.random(size))
        u = np.where(u == 0.0, _TINY_UNIFORM, u)
        return float(u) if size is None else u

    def normal(self, size=None):
        return self.generator.standard_normal(size)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


@dataclass(eq=False)
class PathEnsemble:
    """
    Simulated trajectories on a common grid

    Attributes:
        grid: TimeGrid of the stored columns
        values: (n_paths, n_times) array
        params_tag: Description of the generating model
        seed: Seed the paths were generated from
        nonnegative: Whether entries must be >= 0 (square-root diffusions)
    """

    grid: TimeGrid
    values: np.ndarray
    params_tag: str
    seed: int
    nonnegative: bool = True
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[1] != len(self.grid):
            raise DomainError(
                f"values shape {self.values.shape} does not match grid of {len(self.grid)} points"
            )
        if not np.all(np.isfinite(self.values)):
            raise DomainError("ensemble values must be finite")
        if self.nonnegative and np.any(self.values < 0):
            raise DomainError("square-root diffusion ensemble has negative entries")

    @property
    def n_paths(self):
        return self.values.shape[0]

    @property
    def n_times(self):
        return self.values.shape[1]

    @property
    def times(self):
        return self.grid.t

    @property
    def terminal(self):
        return self.values[:, -1]

    def mean_curve(self):
        return self.values.mean(axis=0)

    def to_frame(self):
        columns = [f"{t:.17g}" for t in self.grid.t]
        return pd.DataFrame(self.values, columns=columns)

    def to_csv(self, path):
        """
        Header row of time points, one row per path, 17 significant digits

        Seed and params_tag go to a '<path>.meta.json' sidecar.
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(
            path, index=False, float_format='%.17g', encoding='utf-8', lineterminator='\n'
        )
        meta = {
            'seed': self.seed,
            'params_tag': self.params_tag,
            'nonnegative': self.nonnegative,
            'uniform_step': self.grid.uniform_step,
        }
        meta.update(self.metadata)
        _meta_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + '\n', encoding='utf-8')
        logger.info(f"Wrote ensemble CSV {path} ({self.n_paths} paths x {self.n_times} times)")
        return path

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        frame = pd.read_csv(path, float_precision='round_trip')
        times = np.array([float(c) for c in frame.columns])
        meta_path = _meta_path(path)
        meta = json.loads(meta_path.read_text(encoding='utf-8')) if meta_path.exists() else {}
        step = meta.get('uniform_step')
        grid = TimeGrid(times, uniform_step=step) if step else TimeGrid.from_times(times)
        return cls(
            grid=grid,
            values=frame.to_numpy(dtype=float),
            params_tag=meta.get('params_tag', ''),
            seed=int(meta.get('seed', 0)),
            nonnegative=bool(meta.get('nonnegative', True)),
        )

    def to_binary(self, path):
        """
        Little-endian layout: magic 'SQDE', uint32 version, uint64 n_paths,
        uint64 n_times, uint64 seed, uint32 tag length, UTF-8 tag,
        float64 times, float64 values row-major
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tag = self.params_tag.encode('utf-8')
        header = np.array(
            [(BINARY_MAGIC, BINARY_VERSION, self.n_paths, self.n_times, self.seed, len(tag))],
            dtype=BINARY_HEADER,
        )
        with open(path, 'wb') as fh:
            fh.write(header.tobytes())
            fh.write(tag)
            fh.write(np.ascontiguousarray(self.grid.t, dtype='<f8').tobytes())
            fh.write(np.ascontiguousarray(self.values, dtype='<f8').tobytes())
        logger.info(f"Wrote ensemble binary {path}")
        return path

    @classmethod
    def from_binary(cls, path, nonnegative=True):
        raw = Path(path).read_bytes()
        header = np.frombuffer(raw, dtype=BINARY_HEADER, count=1)[0]
        if header['magic'] != BINARY_MAGIC:
            raise DomainError(f"{path}: not an ensemble file (bad magic)")
        if int(header['version']) != BINARY_VERSION:
            raise DomainError(f"{path}: unsupported version {int(header['version'])}")
        n_paths, n_times = int(header['n_paths']), int(header['n_times'])
        offset = BINARY_HEADER.itemsize
        tag_len = int(header['tag_len'])
        tag = raw[offset:offset + tag_len].decode('utf-8')
        offset += tag_len
        times = np.frombuffer(raw, dtype='<f8', count=n_times, offset=offset)
        offset += 8 * n_times
        values = np.frombuffer(raw, dtype='<f8', count=n_paths * n_times, offset=offset)
        return cls(
            grid=TimeGrid.from_times(times.astype(float)),
            values=values.reshape(n_paths, n_times).astype(float),
            params_tag=tag,
            seed=int(header['seed']),
            nonnegative=nonnegative,
        )


def _meta_path(path):
    return path.with_name(path.name + '.meta.json')


def check_coupled(e1, e2):
    """Raise CouplingError unless both ensembles share seed, grid and path count"""
    if e1.seed != e2.seed:
        raise CouplingError(f"ensembles use different seeds ({e1.seed} vs {e2.seed})")
    if not e1.grid.same_as(e2.grid):
        raise CouplingError("ensembles use different grids")
    if e1.n_paths != e2.n_paths:
        raise CouplingError(f"ensembles differ in path count ({e1.n_paths} vs {e2.n_paths})")


# ---------------------------------------------------------------------------
# Exact transitions
# ---------------------------------------------------------------------------

def _draw_uniforms(rng, size):
    if isinstance(rng, RngStream):
        return rng.uniform(size if size is not None else 1)
    if isinstance(rng, np.random.Generator):
        u = rng.random(size if size is not None else 1)
        return np.where(u == 0.0, _TINY_UNIFORM, u)
    raise DomainError(f"rng must be an RngStream or numpy Generator, got {type(rng).__name__}")


def _exact_step(x_from, c, decay, nu, u_poisson, u_gamma):
    """
    Inverse-transform draw of c * Gamma(nu + 1 + P), P ~ Poisson(x_from * decay / c)
    """
    lam = np.asarray(x_from, dtype=float) * decay / c
    safe_lam = np.where(lam > 0, lam, 1.0)
    counts = np.where(lam > 0, stats.poisson.ppf(u_poisson, safe_lam), 0.0)
    return c * special.gammaincinv(nu + 1.0 + counts, u_gamma)


def _require_feller(p):
    if not p.feller:
        raise DomainError(f"simulation requires 2a >= sigma^2, got {p.tag()}")
    return p


def _exact_transition(p, x_from, dt, rng, size):
    _require_feller(p)
    x_arr = np.asarray(x_from, dtype=float)
    if np.any(np.isnan(x_arr)) or np.any(x_arr < 0):
        raise DomainError(f"starting value must be >= 0, got {x_from}")
    if not (dt > 0 and math.isfinite(dt)):
        raise DomainError(f"dt must be positive, got {dt}")
    if size is None and x_arr.ndim > 0:
        size = x_arr.shape
    c, m = scale_and_center(p, dt)
    decay = m / p.initial
    u = _draw_uniforms(rng, (2,) + tuple(np.atleast_1d(size if size is not None else 1)))
    draws = _exact_step(x_arr, c, decay, p.nu, u[0], u[1])
    if size is None:
        return float(draws.ravel()[0])
    return draws


def cir_exact_transition(p, x_from, dt, rng, size=None):
    """
    Draw X_{t+dt} given X_t = x_from for the CIR process

    Args:
        p: CirParams with b > 0
        x_from: Current value(s), >= 0
        dt: Step, > 0
        rng: RngStream or numpy Generator
        size: Number of draws (default: one per x_from)

    Returns:
        float or array of draws
    """
    require_cir(p, 'cir_exact_transition', 'bessel_sq_exact_transition')
    return _exact_transition(p, x_from, dt, rng, size)


def bessel_sq_exact_transition(p, y_from, dt, rng, size=None):
    """Draw Y_{t+dt} given Y_t = y_from for the squared Bessel process"""
    p = require_bessel(p)
    return _exact_transition(p, y_from, dt, rng, size)


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------

def _check_run(n_paths, seed, workers):
    if int(n_paths) != n_paths or n_paths < 1:
        raise DomainError(f"n_paths must be a positive integer, got {n_paths}")
    if not (0 <= int(seed) < 2 ** 64):
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if int(workers) < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")


def _record_indices(n_steps, record_stride):
    if int(record_stride) != record_stride or record_stride < 1:
        raise DomainError(f"record_stride must be a positive integer, got {record_stride}")
    idx = list(range(0, n_steps + 1, int(record_stride)))
    if idx[-1] != n_steps:
        idx.append(n_steps)
    return np.asarray(idx, dtype=int)


def _chunks(n_paths):
    return [(start, min(start + CHUNK_PATHS, n_paths)) for start in range(0, n_paths, CHUNK_PATHS)]


def _run_chunks(worker, n_paths, workers):
    chunks = _chunks(n_paths)
    if workers == 1 or len(chunks) == 1:
        parts = [worker(chunk) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=int(workers)) as executor:
            parts = list(executor.map(worker, chunks))
    return parts


def _streams(seed, start, stop):
    return [RngStream(seed, i) for i in range(start, stop)]


def _normal_blocks(streams, n_steps, block):
    """Yield (first step, (n_chunk, len) standard normals) in time blocks"""
    for first in range(0, n_steps, block):
        length = min(block, n_steps - first)
        yield first, np.stack([s.normal(length) for s in streams])


def simulate_exact(p, grid, n_paths, seed, workers=1, record_stride=1):
    """
    Ensemble of exact-transition paths on any grid

    Args:
        p: CirParams or BesselSqParams
        grid: TimeGrid
        n_paths: Number of paths
        seed: 64-bit seed; path i uses stream (seed, i)
        workers: Thread count (results do not depend on it)
        record_stride: Keep every k-th grid point (the last is always kept)

    Returns:
        PathEnsemble
    """
    _require_feller(p)
    _check_run(n_paths, seed, workers)
    record = _record_indices(grid.n_steps, record_stride)
    dts = grid.dt()
    # per-step scale and decay, shared by all paths
    scales = np.empty(dts.size)
    decays = np.empty(dts.size)
    for k, h in enumerate(dts):
        c, m = scale_and_center(p, float(h))
        scales[k] = c
        decays[k] = m / p.initial
    nu = p.nu
    x0 = p.initial

    def worker(chunk):
        start, stop = chunk
        streams = _streams(seed, start, stop)
        out = np.empty((stop - start, record.size))
        x = np.full(stop - start, x0, dtype=float)
        out[:, 0] = x
        slot = 1
        for first in range(0, dts.size, TIME_BLOCK):
            length = min(TIME_BLOCK, dts.size - first)
            u = np.stack([s.uniform((length, 2)) for s in streams])
            for j in range(length):
                k = first + j
                x = _exact_step(x, scales[k], decays[k], nu, u[:, j, 0], u[:, j, 1])
                if slot < record.size and record[slot] == k + 1:
                    out[:, slot] = x
                    slot += 1
        return out

    logger.info(f"Exact simulation: {p.tag()} paths={n_paths} steps={grid.n_steps} seed={seed}")
    values = np.vstack(_run_chunks(worker, n_paths, workers))
    return PathEnsemble(
        grid=grid.subsample(record), values=values, params_tag=p.tag(), seed=int(seed),
        metadata={'method': 'exact'},
    )


def simulate_coupled(param_list, grid, n_paths, seed, workers=1, record_stride=1, coarsen=1):
    """
    Full-truncation Euler for several models driven by the same Brownian path

    Path i of every returned ensemble uses the normals of stream (seed, i).
    Drift and diffusion are evaluated at max(x, 0); the recorded value is
    max(x, 0). With coarsen=m the fine increments are summed in groups of m,
    giving the same Brownian path at step m*h.

    Args:
        param_list: CirParams / BesselSqParams sharing the initial value
        grid: Uniform fine TimeGrid
        n_paths: Number of paths
        seed: 64-bit seed
        workers: Thread count
        record_stride: Keep every k-th (coarse) step
        coarsen: Steps of the fine grid per scheme step

    Returns:
        List of PathEnsemble, one per parameter set
    """
    params = [as_cir(p) for p in param_list]
    if not params:
        raise DomainError("simulate_coupled needs at least one parameter set")
    if not grid.is_uniform:
        raise DomainError("simulate_coupled requires a uniform grid")
    x0 = params[0].x0
    if any(q.x0 != x0 for q in params):
        raise CouplingError("coupled models must share the initial value")
    for q in params:
        _require_feller(q)
    if int(coarsen) != coarsen or coarsen < 1 or grid.n_steps % int(coarsen):
        raise DomainError(f"coarsen must divide the step count {grid.n_steps}, got {coarsen}")
    _check_run(n_paths, seed, workers)

    m = int(coarsen)
    n_coarse = grid.n_steps // m
    h = grid.uniform_step * m
    sqrt_fine = math.sqrt(grid.uniform_step)
    record = _record_indices(n_coarse, record_stride)
    a = np.array([q.a for q in params])[:, None]
    b = np.array([q.b for q in params])[:, None]
    sigma = np.array([q.sigma for q in params])[:, None]
    block = max(m, (TIME_BLOCK // m) * m)

    def worker(chunk):
        start, stop = chunk
        streams = _streams(seed, start, stop)
        n = stop - start
        out = np.empty((len(params), n, record.size))
        x = np.full((len(params), n), x0, dtype=float)
        out[:, :, 0] = x
        slot = 1
        for first, z in _normal_blocks(streams, grid.n_steps, block):
            dw = (z * sqrt_fine).reshape(n, -1, m).sum(axis=2)
            for j in range(dw.shape[1]):
                k = first // m + j
                pos = np.maximum(x, 0.0)
                x = x + (a - b * pos) * h + sigma * np.sqrt(pos) * dw[None, :, j]
                if slot < record.size and record[slot] == k + 1:
                    out[:, :, slot] = np.maximum(x, 0.0)
                    slot += 1
        return out

    logger.info(
        f"Coupled Euler: {len(params)} models, paths={n_paths}, steps={n_coarse}, "
        f"h={h!r}, seed={seed}"
    )
    parts = _run_chunks(worker, n_paths, workers)
    values = np.concatenate(parts, axis=1)
    coarse_grid = grid.subsample(np.arange(0, grid.n_steps + 1, m)).subsample(record)
    return [
        PathEnsemble(
            grid=coarse_grid, values=values[i], params_tag=q.tag(), seed=int(seed),
            metadata={'method': 'euler', 'coarsen': m},
        )
        for i, q in enumerate(params)
    ]


def simulate_smoothed_bessel(eps, c, v0, grid, n_paths, seed, workers=1, record_stride=1):
    """
    Euler-Maruyama paths of dV = c / sqrt(V^2 + eps^2) dt + dW

    Uses the same per-path normals as simulate_coupled, so on a common
    uniform grid the two are driven by one Brownian path. Values may be
    negative. Nonuniform grids are allowed.

    Returns:
        PathEnsemble (nonnegative=False)
    """
    for name, value in (('eps', eps), ('c', c), ('v0', v0)):
        if value is None or not math.isfinite(value):
            raise DomainError(f"{name} must be finite, got {value}")
    if eps == 0:
        raise DomainError("eps must be nonzero")
    if c < 0:
        raise DomainError(f"c must be nonnegative, got {c}")
    _check_run(n_paths, seed, workers)
    record = _record_indices(grid.n_steps, record_stride)
    dts = grid.dt()
    sqrt_dts = np.sqrt(dts)
    eps2 = float(eps) ** 2

    lipschitz = 0.385 * c / eps2
    if lipschitz * dts.max() >= 1.0:
        logger.debug(
            f"step {dts.max()!r} exceeds 1/L = {1.0 / lipschitz!r}; the Euler map is not monotone"
        )

    def worker(chunk):
        start, stop = chunk
        streams = _streams(seed, start, stop)
        out = np.empty((stop - start, record.size))
        v = np.full(stop - start, float(v0))
        out[:, 0] = v
        slot = 1
        for first, z in _normal_blocks(streams, grid.n_steps, TIME_BLOCK):
            for j in range(z.shape[1]):
                k = first + j
                v = v + c / np.sqrt(v * v + eps2) * dts[k] + sqrt_dts[k] * z[:, j]
                if slot < record.size and record[slot] == k + 1:
                    out[:, slot] = v
                    slot += 1
        return out

    logger.info(
        f"Smoothed Bessel: eps={eps!r} c={c!r} v0={v0!r} paths={n_paths} "
        f"steps={grid.n_steps} seed={seed}"
    )
    values = np.vstack(_run_chunks(worker, n_paths, workers))
    return PathEnsemble(
        grid=grid.subsample(record), values=values,
        params_tag=f"smoothed_bessel(eps={float(eps)!r},c={float(c)!r},v0={float(v0)!r})",
        seed=int(seed), nonnegative=False, metadata={'method': 'euler'},
    )


def simulate(p, grid, n_paths, seed, method='exact', workers=1, record_stride=1):
    """Single-model ensemble by exact transitions or full-truncation Euler"""
    if method == 'exact':
        return simulate_exact(p, grid, n_paths, seed, workers=workers, record_stride=record_stride)
    if method == 'euler':
        return simulate_coupled([p], grid, n_paths, seed, workers=workers, record_stride=record_stride)[0]
    raise DomainError(f"unknown method '{method}' (expected 'exact' or 'euler')")


__all__ = [
    'TimeGrid', 'RngStream', 'PathEnsemble', 'CirParams', 'BesselSqParams',
    'cir_exact_transition', 'bessel_sq_exact_transition', 'simulate_exact',
    'simulate_coupled', 'simulate_smoothed_bessel', 'simulate', 'check_coupled',
]
