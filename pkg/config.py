"""
Configuration management for the square-root diffusion laboratory
Centralizes output paths, per-command defaults and experiment config files
"""
import os
from dataclasses import dataclass, field
from pathlib import Path

from dotenv import load_dotenv

from errors import ConfigError

# Environment overrides (.env in the project root or the working directory)
load_dotenv()

# Project root directory
PROJECT_ROOT = Path(__file__).parent

OUTPUT_DIR = Path(os.getenv('SQD_OUTPUT_DIR', PROJECT_ROOT / 'output'))

# Output file paths
PATHS = {
    'ensemble_csv': OUTPUT_DIR / 'ensembles' / 'ensemble.csv',
    'ensemble_bin': OUTPUT_DIR / 'ensembles' / 'ensemble.bin',
    'density_csv': OUTPUT_DIR / 'tables' / 'density.csv',
    'moments_csv': OUTPUT_DIR / 'tables' / 'moments.csv',
    'bounds_dir': OUTPUT_DIR / 'bounds',
    'estimate_json': OUTPUT_DIR / 'estimates' / 'estimate.json',
    'instability_dir': OUTPUT_DIR / 'instability',
    'limit_json': OUTPUT_DIR / 'limit' / 'limit.json',
}

# Logging configuration
LOG_CONFIG = {
    'level': os.getenv('SQD_LOG_LEVEL', 'INFO'),
    'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    'datefmt': '%Y-%m-%d %H:%M:%S',
}

DEFAULT_SEED = 20240601

_COMMON = {
    'seed': DEFAULT_SEED,
    'workers': 1,
    'out': '',
}

# Default configuration per command; the key set is the set of allowed keys
DEFAULT_CONFIG = {
    'simulate': {
        **_COMMON,
        'x0': 1.0, 'a': 2.0, 'b': 1.0, 'sigma': 1.0,
        'T': 1.0, 'n_steps': 64, 'n_paths': 1000,
        'method': 'exact',
        'record_stride': 1,
    },
    'density': {
        **_COMMON,
        'x0': 1.0, 'a': 2.0, 'b': 1.0, 'sigma': 1.0,
        'times': [0.1, 1.0, 10.0],
        'x_max': 10.0, 'n_points': 201,
    },
    'moments': {
        **_COMMON,
        'x0': 1.0, 'a': 2.0, 'b': 1.0, 'sigma': 1.0,
        'times': [0.5, 1.0, 2.0],
        'n_paths': 100000,
    },
    'bounds': {
        **_COMMON,
        'x0': 1.0, 'a': 1.0, 'sigma': 1.0, 'b0': 0.0,
        'bn_list': [0.5, 0.2, 0.1, 0.05],
        'T': 1.0, 'n_steps': 1024, 'n_paths': 10000,
        'z': 3.0, 'coarsen': 2,
        'n_report': 64,
        'growth_a': 2.0, 'growth_b': 1.0, 'growth_T': 2.0,
    },
    'estimate': {
        **_COMMON,
        'input': '',
        'y0': 1.0, 'a': 2.0, 'sigma': 1.0,
        'T': 100.0, 'step': 0.01, 'n_paths': 50,
        'sigma_source': 'known',
    },
    'instability': {
        **_COMMON,
        'x0': 1.0, 'a': 2.0, 'b': 1.0, 'sigma': 1.0,
        'N': 2.0, 'T': 200.0, 'step': 0.25,
        'max_step': 10.0, 'v0': 1.0, 'tolerance': 0.02,
        'times': [50.0, 100.0, 200.0],
        'bessel_times': [100.0, 1000.0, 10000.0],
        'eps': 1.0, 'c': 1.0,
        'n_paths': 2000,
    },
    'limit': {
        **_COMMON,
        'eps': 1.0, 'c': 1.0, 'v0': 1.0,
        'T': 10000.0, 'initial_step': 0.01, 'max_step': 1.0,
        'n_paths': 10000,
        'ks_threshold': 0.03,
    },
}

COMMANDS = tuple(DEFAULT_CONFIG)

_OUTPUT_SUBDIRS = ('ensembles', 'tables', 'bounds', 'estimates', 'instability', 'limit')


def get_path(key):
    """
    Get a file path from the PATHS dictionary

    Args:
        key: Path key (e.g., 'ensemble_csv', 'bounds_dir')

    Returns:
        Path object
    """
    if key not in PATHS:
        raise KeyError(f"Path key '{key}' not found. Available keys: {list(PATHS.keys())}")
    return PATHS[key]


def get_path_str(key):
    """Get path as string"""
    return str(get_path(key))


def ensure_output_dirs(root=None):
    """Create the output directory tree (default: OUTPUT_DIR)"""
    root = Path(root) if root else OUTPUT_DIR
    for sub in _OUTPUT_SUBDIRS:
        (root / sub).mkdir(parents=True, exist_ok=True)
    return root


def load_config_file(path):
    """
    Read a flat key=value experiment file

    Blank lines and lines starting with '#' are ignored. Values stay strings;
    coercion happens in build_experiment_config.

    Returns:
        dict mapping key to raw string value
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")

    values = {}
    for lineno, raw in enumerate(path.read_text(encoding='utf-8').splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        if '=' not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got '{line}'")
        key, value = (part.strip() for part in line.split('=', 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        values[key] = value
    return values


def _coerce(key, value, default):
    if isinstance(value, str):
        text = value.strip()
        try:
            if isinstance(default, bool):
                if text.lower() not in ('true', 'false', '1', '0'):
                    raise ValueError(text)
                return text.lower() in ('true', '1')
            if isinstance(default, int):
                return int(text)
            if isinstance(default, float):
                return float(text)
            if isinstance(default, list):
                return [float(item) for item in text.split(',') if item.strip()]
        except ValueError:
            raise ConfigError(f"Invalid value for '{key}': '{value}'") from None
        return text

    if isinstance(default, list):
        return [float(item) for item in value]
    if isinstance(default, float) and isinstance(value, (int, float)):
        return float(value)
    return value


@dataclass
class ExperimentConfig:
    """Validated settings for one command run"""

    command: str
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    @property
    def seed(self):
        return self.values['seed']

    @property
    def workers(self):
        return self.values['workers']

    @property
    def out_dir(self):
        out = self.values.get('out') or ''
        return Path(out) if out else OUTPUT_DIR

    def as_record(self, exclude=()):
        """Key=value text identical to what load_config_file reads back"""
        lines = []
        for key in sorted(self.values):
            if key in exclude:
                continue
            value = self.values[key]
            if isinstance(value, list):
                value = ','.join(repr(float(v)) for v in value)
            lines.append(f"{key} = {value}")
        return '\n'.join(lines) + '\n'


def build_experiment_config(command, file_values=None, overrides=None):
    """
    Merge defaults, config-file values and CLI overrides (flags win)

    Args:
        command: Subcommand name (key of DEFAULT_CONFIG)
        file_values: dict from load_config_file, or None
        overrides: dict of CLI values; None entries are ignored

    Returns:
        ExperimentConfig
    """
    if command not in DEFAULT_CONFIG:
        raise ConfigError(f"Unknown command '{command}'. Available: {list(COMMANDS)}")

    defaults = DEFAULT_CONFIG[command]
    merged = {key: (list(value) if isinstance(value, list) else value)
              for key, value in defaults.items()}

    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            if key not in defaults:
                raise ConfigError(
                    f"Unknown key '{key}' for command '{command}'. "
                    f"Allowed keys: {sorted(defaults)}"
                )
            merged[key] = _coerce(key, value, defaults[key])

    _validate(command, merged)
    return ExperimentConfig(command=command, values=merged)


def _require(condition, message):
    if not condition:
        raise ConfigError(message)


def _validate(command, values):
    _require(0 <= values['seed'] < 2 ** 64, "seed must be a 64-bit unsigned integer")
    _require(values['workers'] >= 1, "workers must be >= 1")
    if 'n_paths' in values:
        minimum = 0 if command == 'moments' else 2
        _require(values['n_paths'] >= minimum, f"n_paths must be >= {minimum}")
    for key in ('T', 'step', 'x_max', 'N', 'initial_step', 'max_step', 'z', 'growth_T', 'tolerance', 'ks_threshold'):
        if key in values:
            _require(values[key] > 0, f"{key} must be positive")
    for key in ('n_steps', 'n_points', 'record_stride', 'coarsen', 'n_report'):
        if key in values:
            _require(values[key] >= 1, f"{key} must be >= 1")
    if 'method' in values:
        _require(values['method'] in ('exact', 'euler'), "method must be 'exact' or 'euler'")
    if 'sigma_source' in values:
        _require(values['sigma_source'] in ('known', 'qv'), "sigma_source must be 'known' or 'qv'")
    if 'eps' in values:
        _require(values['eps'] != 0, "eps must be nonzero")
    for key in ('times', 'bessel_times', 'bn_list'):
        if key in values:
            _require(len(values[key]) > 0, f"{key} must not be empty")
            _require(all(v > 0 for v in values[key]), f"{key} entries must be positive")
    _validate_model(command, values)
    if command == 'bounds':
        _require(values['n_steps'] % values['coarsen'] == 0, "coarsen must divide n_steps")
    if command == 'instability':
        _require(max(values['times']) <= values['T'], "occupancy times must not exceed T")
        _require(values['max_step'] >= values['step'], "max_step must be >= step")
    if command == 'limit':
        _require(values['max_step'] >= values['initial_step'], "max_step must be >= initial_step")


def _validate_model(command, values):
    start = 'y0' if command == 'estimate' else 'x0'
    if start in values:
        _require(values[start] > 0, f"{start} must be positive")
    for key in ('a', 'sigma', 'growth_a'):
        if key in values:
            _require(values[key] > 0, f"{key} must be positive")
    for key in ('b', 'b0', 'growth_b', 'c'):
        if key in values:
            _require(values[key] >= 0, f"{key} must be nonnegative")
    if 'sigma' not in values:
        return
    for key in ('a', 'growth_a'):
        if key in values:
            _require(
                2.0 * values[key] >= values['sigma'] ** 2,
                f"Feller condition requires 2*{key} >= sigma^2, got {key}={values[key]}, sigma={values['sigma']}",
            )
