"""Double-well potentials with derivative and sampled structural checks."""

import json
from dataclasses import dataclass, field

import numpy as np

from . import _core
from .errors import ConfigError, ConstructionError
from .kernels import kernel_from_spec, parse_spec

CUSTOM = -1


@dataclass(frozen=True)
class Potential:
    kind: str
    params: dict
    well_low: float
    well_high: float
    rho: float
    par: np.ndarray = field(repr=False, compare=False)
    kernel: object = field(default=None, repr=False, compare=False)
    custom: tuple = field(default=None, repr=False, compare=False)

    @property
    def name(self):
        return self.kind

    @property
    def code(self):
        return _CODES.get(self.kind, CUSTOM)

    @property
    def gap(self):
        return self.well_high - self.well_low

    @property
    def midpoint(self):
        return 0.5 * (self.well_low + self.well_high)

    def _eval(self, deriv, y):
        if self.custom is not None:
            out = np.asarray(self.custom[int(deriv)](np.asarray(y, dtype=float)),
                             dtype=float)
            return float(out) if np.ndim(y) == 0 else out
        if np.ndim(y) == 0:
            return float(_core.pot_map(deriv, self.code, self.par,
                                       np.array([float(y)]))[0])
        y = np.asarray(y, dtype=float)
        return _core.pot_map(deriv, self.code, self.par,
                             y.ravel()).reshape(y.shape)

    def V(self, y):
        return self._eval(False, y)

    def V_prime(self, y):
        return self._eval(True, y)

    def is_symmetric(self, n=401, tol=1e-14):
        """V(mid + s) == V(mid - s) on a sample of s in (0, gap/2]."""
        s = np.linspace(0.0, 0.5 * self.gap, n)[1:]
        a = self.V(self.midpoint + s)
        b = self.V(self.midpoint - s)
        return bool(np.all(np.abs(a - b) <= tol * np.maximum(1.0, np.abs(a))))

    def to_spec(self):
        params = dict(self.params)
        if self.kernel is not None:
            params["kernel"] = self.kernel.to_spec()
        return {"kind": self.kind, "params": params}


_CODES = {
    "phi-dw": _core.P_PHI_DW,
    "p-dw": _core.P_P_DW,
    "quartic": _core.P_QUARTIC,
    "asym": _core.P_ASYM,
}


def convexity_radius(V, well_low, well_high, step=None):
    """Largest r such that second differences of V stay positive on
    [w - r, w + r] for both wells, scanned in steps of 1e-3 * gap.
    """
    gap = well_high - well_low
    step = 1e-3 * gap if step is None else step
    jmax = int(0.5 * gap / step)
    radius = np.inf
    for w in (well_low, well_high):
        x = w + step * np.arange(-jmax - 1, jmax + 2)
        v = V(x)
        d2 = v[2:] - 2.0 * v[1:-1] + v[:-2]
        dist = np.abs(x[1:-1] - w)
        bad = dist[d2 <= 0]
        r = (bad.min() - step) if bad.size else jmax * step
        radius = min(radius, max(r, 0.0))
    return float(radius)


def _finish(kind, params, lo, hi, par, kernel=None):
    par = np.asarray(par, dtype=float)
    par.setflags(write=False)
    tmp = Potential(kind, params, lo, hi, 0.0, par, kernel)
    rho = convexity_radius(tmp.V, lo, hi)
    return Potential(kind, params, float(lo), float(hi), rho, par, kernel)


def phi_double_well(k, alpha):
    """V(t) = Phi(|t^2 - alpha^2|) for kernel ``k``; wells at -alpha, alpha."""
    if not alpha > 0:
        raise ConstructionError(f"alpha must be positive, got {alpha}")
    return _finish("phi-dw", {"alpha": alpha}, -alpha, alpha,
                   [alpha, float(k.code), *k.par], kernel=k)


def p_double_well(p, alpha):
    """V(t) = |t^2 - alpha^2|^p / p."""
    if not p > 1 or not alpha > 0:
        raise ConstructionError(f"p-dw needs p > 1, alpha > 0, got {p}, {alpha}")
    return _finish("p-dw", {"p": p, "alpha": alpha}, -alpha, alpha, [p, alpha])


def quartic_well(alpha):
    """V(t) = (t^2 - alpha^2)^2; V''(+-alpha) = 8 alpha^2."""
    if not alpha > 0:
        raise ConstructionError(f"alpha must be positive, got {alpha}")
    return _finish("quartic", {"alpha": alpha}, -alpha, alpha, [alpha])


def asymmetric_well(p, a, b):
    """V(t) = |(t - a)(t - b)|^p / p with wells a < b."""
    if not p > 1 or not b > a:
        raise ConstructionError(f"asym needs p > 1 and a < b, got {p}, {a}, {b}")
    return _finish("asym", {"p": p, "a": a, "b": b}, a, b, [p, a, b])


def custom_potential(V, V_prime, well_low, well_high, name="custom"):
    """Wrap vectorised callables; usable for certification only."""
    tmp = Potential(name, {}, float(well_low), float(well_high), 0.0,
                    np.zeros(0), None, (V, V_prime))
    rho = convexity_radius(tmp.V, well_low, well_high)
    return Potential(name, {}, float(well_low), float(well_high), rho,
                     np.zeros(0), None, (V, V_prime))


def potential_from_spec(spec, kernel=None):
    """Build from ``{"kind": "phi-dw"|"p-dw"|"quartic"|"asym", "params": {...}}``.

    ``phi-dw`` takes its kernel from ``params["kernel"]`` if present, else
    from the ``kernel`` argument.
    """
    if isinstance(spec, str) and spec.strip().startswith("{"):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON spec: {exc}") from None
    if isinstance(spec, dict):
        kind = spec.get("kind")
        params = dict(spec.get("params", {}))
    else:
        parsed = parse_spec(spec)
        kind, params = parsed["kind"], parsed["params"]
    try:
        if kind == "phi-dw":
            k = params.pop("kernel", None)
            k = kernel_from_spec(k) if k is not None else kernel
            if k is None:
                raise ConfigError("phi-dw needs a kernel")
            return phi_double_well(k, **params)
        if kind == "p-dw":
            return p_double_well(**params)
        if kind == "quartic":
            return quartic_well(**params)
        if kind == "asym":
            return asymmetric_well(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {kind}: {exc}") from None
    raise ConfigError(f"unknown potential kind {kind!r}")


# ------------------------------------------------------------ certification


def _ratio_extrema(num, den):
    with np.errstate(divide="ignore", invalid="ignore"):
        r = num / den
    r = r[np.isfinite(r)]
    if r.size == 0:
        return float("nan"), float("nan")
    return float(r.min()), float(r.max())


def _positive_pair(lo, hi):
    return bool(np.isfinite(lo) and np.isfinite(hi) and lo > 0 and hi > 0)


def certify_hypotheses(P, k, grid=None):
    """Sampled check of the structural hypotheses on V.

    Envelope constants are reported as fitted extrema over the grid; inner
    scale constants (c2, c4, c6, c8) are fixed at 1.  Report-valued, never
    raises.
    """
    a, b = P.well_low, P.well_high
    gap = P.gap
    mid = P.midpoint
    grid = np.linspace(a, b, 2001) if grid is None else np.asarray(grid, float)
    inner = grid[(grid > a) & (grid < b)]
    wide = np.linspace(a - 0.2 * gap, b + 0.2 * gap, 2401)
    rep = {}

    v_wide = P.V(wide)
    rep["V1"] = {"passed": bool(np.all(v_wide >= -1e-14)),
                 "min_V": float(v_wide.min())}

    v_wells = np.abs([P.V(a), P.V(b)])
    v_in = P.V(inner)
    rep["V2"] = {"passed": bool(np.all(v_wells <= 1e-14) and np.all(v_in > 0)),
                 "V_at_wells": v_wells.tolist(), "min_interior": float(v_in.min())}

    # V against Phi(|t - well|) on one-sided neighbourhoods
    delta = 0.25 * gap
    s = np.linspace(0.0, delta, 401)[1:]
    up = b - s
    low = a + s
    a1, a2 = _ratio_extrema(P.V(up), k.Phi(s))
    a3, a4 = _ratio_extrema(P.V(low), k.Phi(s))
    rep["V3"] = {"passed": _positive_pair(a1, a2) and _positive_pair(a3, a4),
                 "a1": a1, "a2": a2, "a3": a3, "a4": a4, "delta": delta}

    # V' against -(t - mid) phi(|t - well|) |t - well|
    tu = inner[inner > mid]
    tl = inner[inner < mid]
    c1, c3 = _ratio_extrema(P.V_prime(tu), -(tu - mid) * k.flux(np.abs(tu - b)))
    c5, c7 = _ratio_extrema(P.V_prime(tl), -(tl - mid) * k.flux(np.abs(tl - a)))
    rep["V4"] = {"passed": _positive_pair(c1, c3) and _positive_pair(c5, c7),
                 "c1": c1, "c3": c3, "c5": c5, "c7": c7,
                 "c2": 1.0, "c4": 1.0, "c6": 1.0, "c8": 1.0}

    rep["V5"] = {"passed": P.rho > 0, "rho": P.rho}

    e = 1e-4 * gap
    d2 = [(P.V(w + e) - 2.0 * P.V(w) + P.V(w - e)) / (e * e) for w in (a, b)]
    rep["V6"] = {"passed": bool(min(d2) > 0), "V2_at_wells": d2}

    d1, d2_ = _ratio_extrema(P.V_prime(tu), -(tu - mid) * np.abs(tu - b))
    d3, d4 = _ratio_extrema(P.V_prime(tl), -(tl - mid) * np.abs(tl - a))
    rep["V7"] = {"passed": _positive_pair(d1, d2_) and _positive_pair(d3, d4),
                 "d1": d2_, "d2": d1, "d3": d4, "d4": d3}

    rep["V8"] = {"passed": True,
                 "sup_abs_V_prime": float(np.max(np.abs(P.V_prime(grid))))}

    rep["existence_hypotheses"] = all(rep[h]["passed"]
                                     for h in ("V1", "V2", "V3", "V4", "V5"))
    rep["mean_curvature_hypotheses"] = all(rep[h]["passed"]
                                           for h in ("V1", "V2", "V6", "V7"))
    return rep
