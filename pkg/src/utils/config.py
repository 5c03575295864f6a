import copy
import json
import logging
import os
from dataclasses import asdict, dataclass, field

from .errors import ValidationError

logger = logging.getLogger(__name__)

VERSION = "0.1.0"
CONFIG_PATH = "nwidth_config.json"
THREADS_ENV = "NWIDTH_THREADS"


def get_default_config():
    """Return the default configuration"""
    return {
        "kernel": {
            "spec": "family=exp gamma=1.0 a=1.0"
        },
        "domains": {
            "weierstrass": {"num_points": 10000, "b": 7},
            "lorenz": {"num_points": 10000, "dt": 0.005, "burn_in": 10000},
            "sphere": {"num_points": 20000, "d": 3}
        },
        "widths": {
            "T": 300,
            "pivot_tol": None
        },
        "fit": {
            "method": "ransac",
            "iterations": 1000,
            "residual_threshold": 0.05,
            "seed": 0
        },
        "krr": {
            "d": 2,
            "sizes": [32, 64, 128, 256, 512, 1024, 2048],
            "trials": 10,
            "n_test": 10000,
            "noise_amp": 0.2,
            "bisection_iters": 30,
            "norm_tol": 1e-3,
            "lambda_min": 1e-12,
            "lambda_max": 1e3
        },
        "runtime": {
            "threads": 0,
            "seed": 0
        },
        "output": {
            "results_dir": "results",
            "save_plots": False
        }
    }


def merge_config(base, override):
    """Recursively overlay `override` on a copy of `base`; unknown keys are kept."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def load_config(path=None):
    """
    Load a configuration file merged over the defaults.

    A missing file gives the defaults. A file that is not valid JSON raises
    ValidationError.

    Args:
        path: Config file path; defaults to nwidth_config.json in the working directory

    Returns:
        Configuration dict
    """
    config_path = path or CONFIG_PATH
    defaults = get_default_config()

    if not os.path.exists(config_path):
        if path is not None:
            raise ValidationError(f"config file not found: {config_path}")
        return defaults

    try:
        with open(config_path, 'r') as f:
            user_config = json.load(f)
    except json.JSONDecodeError as e:
        raise ValidationError(f"{config_path}: invalid JSON ({e})") from e
    if not isinstance(user_config, dict):
        raise ValidationError(f"{config_path}: top level must be an object")

    logger.debug("loaded configuration from %s", config_path)
    return merge_config(defaults, user_config)


def save_config(config, path=None):
    """Save configuration to file"""
    config_path = path or CONFIG_PATH

    with open(config_path, 'w') as f:
        json.dump(config, f, indent=2)
        f.write("\n")

    logger.info("configuration saved to %s", config_path)


def ensure_results_dir(config):
    """Ensure results directory exists"""
    results_dir = config['output']['results_dir']
    os.makedirs(results_dir, exist_ok=True)
    return results_dir


def resolve_threads(flag, config):
    """
    Worker thread count: CLI flag, then NWIDTH_THREADS, then the config file.

    0 means one thread per CPU.
    """
    value = flag
    if value is None:
        env = os.environ.get(THREADS_ENV)
        if env not in (None, ""):
            try:
                value = int(env)
            except ValueError:
                raise ValidationError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    if value is None:
        value = config['runtime']['threads']
    value = int(value)
    if value < 0:
        raise ValidationError(f"threads must be >= 0, got {value}")
    return value or (os.cpu_count() or 1)


@dataclass(frozen=True)
class RunConfig:
    """
    Fully resolved settings of one CLI invocation.

    Written into the header of every output file; re-running with the same
    settings reproduces the file body.
    """
    command: str
    options: dict = field(default_factory=dict)
    seed: int = 0
    threads: int = 1
    out: str = "-"
    version: str = VERSION

    def as_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"), default=str)
