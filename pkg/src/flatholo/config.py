"""Run configuration and the commutator-angle calibration constants."""

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field, replace

import numpy as np

SCHEMA = 1
SEED_ENV = "FLATHOLO_SEED"

# Output of calibrate() on the default grid; regenerate with `flatholo calibrate`.
DEFAULT_C0 = 0.6318311888723951
DEFAULT_K = 0.6105104200820636


class CalibrationFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    dist_grid: int = 2048
    orbit_iterates: int = 10 ** 6
    defect_tol: float = 1e-8
    integer_tol: float = 1e-6
    newton_tol: float = 1e-10
    c0: float = DEFAULT_C0
    K: float = DEFAULT_K
    output_format: str = "json"

    def __post_init__(self):
        for name in ("defect_tol", "integer_tol", "newton_tol", "c0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.dist_grid < 16 or self.orbit_iterates < 1:
            raise ValueError("grid sizes must be positive")
        if self.output_format not in ("json", "csv"):
            raise ValueError(f"unknown output format {self.output_format!r}")

    def to_dict(self):
        return asdict(self)

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_updates(self, **kw):
        return replace(self, **kw)


def load_config(path=None, env=None):
    """Defaults, overlaid by a JSON file, overlaid by FLATHOLO_SEED."""
    env = os.environ if env is None else env
    data = {}
    if path is not None and os.path.exists(path):
        with open(path) as fh:
            data = json.load(fh)
    known = RunConfig.__dataclass_fields__
    unknown = set(data) - set(known)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    cfg = RunConfig(**data)
    if env.get(SEED_ENV):
        cfg = cfg.with_updates(seed=int(env[SEED_ENV]))
    return cfg


def save_config(cfg, path):
    with open(path, "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


CALIBRATION_GRID = tuple(float(x) for x in np.geomspace(0.0125, 0.2, 17))


@dataclass(frozen=True)
class Calibration:
    c0: float
    K: float
    slope: float
    grid: tuple = field(default=CALIBRATION_GRID)


def calibrate(grid=CALIBRATION_GRID, band=(1.95, 2.05)):
    """Fit theta(eps) = c0 eps^2 + c1 eps^3 on a log grid.

    K is the smallest constant with |theta - c0 eps^2| <= K c0 eps^3 on the
    grid, so c0 eps^2 (1 - K eps) never exceeds theta there.
    """
    from .mwbuild import commutator_angle

    eps = np.asarray(grid, dtype=float)
    theta = np.array([commutator_angle(e) for e in eps])
    slope = float(np.polyfit(np.log(eps), np.log(theta), 1)[0])
    if not band[0] <= slope <= band[1]:
        raise CalibrationFailure(f"log-log slope {slope:.4f} outside {band}")
    A = np.stack([eps ** 2, eps ** 3], axis=1)
    (c0, _c1), *_ = np.linalg.lstsq(A, theta, rcond=None)
    K = float(np.max(np.abs(theta - c0 * eps ** 2) / (c0 * eps ** 3)))
    if not c0 > 0 or not math.isfinite(K):
        raise CalibrationFailure(f"bad fit c0={c0!r} K={K!r}")
    return Calibration(float(c0), K, slope, tuple(float(e) for e in eps))
