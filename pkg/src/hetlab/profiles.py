"""Sampled heteroclinic profiles and their CSV / JSON serialisation."""

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import ConfigError

CSV_HEADER = ("t", "q", "qprime", "energy_residual")
ROUTES = ("cauchy", "variational")


@dataclass(frozen=True)
class HeteroclinicProfile:
    t: np.ndarray
    q: np.ndarray
    q_prime: np.ndarray
    energy_residual: np.ndarray
    wells: tuple
    route: str = "cauchy"
    normalization_shift: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)
    raw_t: np.ndarray = field(default=None, repr=False, compare=False)
    raw_q: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.route not in ROUTES:
            raise ValueError(f"route must be one of {ROUTES}")
        n = len(self.t)
        if not (len(self.q) == len(self.q_prime) == len(self.energy_residual) == n):
            raise ValueError("profile arrays must have equal length")

    def __len__(self):
        return len(self.t)

    def interpolate(self, t):
        """Cubic Hermite interpolant through (t_i, q_i, q'_i)."""
        return CubicHermiteSpline(self.t, self.q, self.q_prime,
                                  extrapolate=False)(t)

    def with_arrays(self, **changes):
        """Copy with some arrays replaced (used for fault injection)."""
        d = {k: getattr(self, k) for k in ("t", "q", "q_prime",
                                           "energy_residual", "wells", "route",
                                           "normalization_shift", "meta")}
        d.update(changes)
        return HeteroclinicProfile(**d)

    def to_dict(self):
        return {
            "t": self.t.tolist(),
            "q": self.q.tolist(),
            "q_prime": self.q_prime.tolist(),
            "energy_residual": self.energy_residual.tolist(),
            "wells": list(self.wells),
            "route": self.route,
            "normalization_shift": self.normalization_shift,
            "meta": self.meta,
        }


def write_csv(profile, dest):
    """Write to a path or an open text file, 17 significant digits."""
    if hasattr(dest, "write"):
        _write_rows(profile, dest)
    else:
        with open(dest, "w", newline="") as fh:
            _write_rows(profile, fh)


def _write_rows(profile, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in zip(profile.t, profile.q, profile.q_prime,
                   profile.energy_residual):
        w.writerow(["%.17g" % x for x in row])


def write_json(profile, path):
    with open(path, "w") as fh:
        # repr of Python floats round-trips exactly
        json.dump(profile.to_dict(), fh)


def read_csv(path, wells, route="cauchy", meta=None):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ConfigError(f"{path}: expected header {','.join(CSV_HEADER)}")
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:] if r])
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] != 4:
        raise ConfigError(f"{path}: no data rows")
    return HeteroclinicProfile(data[:, 0], data[:, 1], data[:, 2], data[:, 3],
                               tuple(wells), route, 0.0, dict(meta or {}))


def read_json(path):
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    try:
        return HeteroclinicProfile(
            np.asarray(d["t"], float), np.asarray(d["q"], float),
            np.asarray(d["q_prime"], float),
            np.asarray(d["energy_residual"], float),
            tuple(d["wells"]), d.get("route", "cauchy"),
            float(d.get("normalization_shift", 0.0)), d.get("meta", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed profile ({exc})") from None
