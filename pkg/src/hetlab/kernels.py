"""Operator kernels phi and the derived functions Phi, G, G^{-1}.

A kernel is identified by a family name and a parameter dict.  Its growth
exponents ``l <= m`` bound the ratio ``(phi(t) t)' / phi(t)`` between
``l - 1`` and ``m - 1``; the builders declare them and
:func:`certify_kernel` checks the declaration on a sampled grid.

``Phi(t) = int_0^t s phi(s) ds`` and ``G(t) = int_0^t s (phi(s) s)' ds``.
The quadrature routes :func:`big_phi` and :func:`big_g` are the reference;
kernel methods use closed forms where available and the identity
``G(t) = t^2 phi(t) - Phi(t)``.
"""

import functools
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import _core
from .errors import (ConfigError, ConstructionError, EvaluationDomainError,
                     HypothesisViolation, UnboundedInverseError)

DEFAULT_QUAD_TOL = 1e-12
QUAD_MAX_DEPTH = 60
CERT_GRID = np.logspace(-8.0, 8.0, 2048)
CERT_SLACK = 1e-9

_CODES = {
    "p-power": _core.K_POWER,
    "mixed": _core.K_MIXED,
    "gamma-power": _core.K_GAMMA,
    "plog": _core.K_PLOG,
    "sinh-integral": _core.K_SINH,
    "mc-truncated": _core.K_MC,
}


@dataclass(frozen=True)
class PhiKernel:
    kind: str
    params: dict
    l: float
    m: float
    par: np.ndarray = field(repr=False, compare=False)

    @property
    def name(self):
        return self.kind

    @property
    def code(self):
        return _CODES[self.kind]

    def _map(self, which, t):
        if np.ndim(t) == 0:
            return float(_core.kernel_map(which, self.code, self.par,
                                          np.array([float(t)]))[0])
        t = np.asarray(t, dtype=float)
        return _core.kernel_map(which, self.code, self.par,
                                t.ravel()).reshape(t.shape)

    def phi(self, t):
        return self._map(_core.MAP_PHI, t)

    def phi_prime(self, t):
        return self._map(_core.MAP_PHI_PRIME, t)

    def flux(self, t):
        """phi(t) t"""
        return self._map(_core.MAP_FLUX, t)

    def dflux(self, t):
        """(phi(t) t)'"""
        return self._map(_core.MAP_DFLUX, t)

    def Phi(self, t):
        return self._map(_core.MAP_BIG_PHI, np.abs(t))

    def G(self, t):
        return self._map(_core.MAP_BIG_G, t)

    def G_inv(self, v):
        out = self._map(_core.MAP_G_INV, v)
        if np.any(np.asarray(out) < 0):
            raise UnboundedInverseError(f"G^-1 bracket overflow for {self.kind}")
        return out

    def conjugate(self, s):
        return self._map(_core.MAP_CONJ, s)

    def exponent_ratio(self, t):
        """(phi(t) t)' / phi(t); lies in [l-1, m-1] under the hypotheses."""
        return self.dflux(t) / self.phi(t)

    def to_spec(self):
        return {"kind": self.kind, "params": dict(self.params)}

    def key(self):
        return (self.kind, tuple(sorted(self.params.items())))


def _make(kind, params, l, m, par):
    par = np.asarray(par, dtype=float)
    par.setflags(write=False)
    return PhiKernel(kind, dict(params), float(l), float(m), par)


# ------------------------------------------------------------------ builders


def p_power(p):
    """phi(t) = t^(p-2), Phi(t) = t^p / p; l = m = p."""
    if not p > 1:
        raise ConstructionError(f"p-power needs p > 1, got {p}")
    return _make("p-power", {"p": p}, p, p, [p])


def mixed(p, q):
    """Phi(t) = t^p/p + t^q/q with 1 < p < q; l = p, m = q."""
    if not (1 < p < q):
        raise ConstructionError(f"mixed needs 1 < p < q, got p={p}, q={q}")
    return _make("mixed", {"p": p, "q": q}, p, q, [p, q])


def gamma_power(gamma):
    """Phi(t) = (1 + t^2)^gamma - 1 with gamma > 1; l = 2, m = 2 gamma.

    The exponent ratio is 1 + 2(gamma-1) t^2 / (1+t^2), which sweeps
    [1, 2 gamma - 1).
    """
    if not gamma > 1:
        raise ConstructionError(f"gamma-power needs gamma > 1, got {gamma}")
    return _make("gamma-power", {"gamma": gamma}, 2.0, 2.0 * gamma, [gamma])


def plog(p):
    """Phi(t) = t^p log(1 + t); phi = Phi'(t)/t taken symbolically.

    Phi behaves like t^(p+1) at 0 and t^p log t at infinity, so the ratio
    decreases from p to p - 1: l = p, m = p + 1.
    """
    if not p > 1:
        raise ConstructionError(f"plog needs p > 1, got {p}")
    return _make("plog", {"p": p}, p, p + 1.0, [p])


def sinh_integral(gamma, beta):
    """Phi(t) = int_0^t s^(1-gamma) asinh(s)^beta ds, 0 <= gamma < 1, beta > 0.

    No closed form; Phi is evaluated by quadrature.  The ratio limits are
    1 - gamma + beta at 0 and 1 - gamma at infinity, giving
    l = 2 - gamma, m = 2 - gamma + beta.
    """
    if not (0 <= gamma < 1) or not beta > 0:
        raise ConstructionError(
            f"sinh-integral needs 0 <= gamma < 1 and beta > 0, got {gamma}, {beta}")
    return _make("sinh-integral", {"gamma": gamma, "beta": beta},
                 2.0 - gamma, 2.0 - gamma + beta, [gamma, beta])


def _mc_truncated(L):
    from .mc_truncation import truncated_kernel
    return truncated_kernel(L)


BUILDERS = {
    "p-power": p_power,
    "mixed": mixed,
    "gamma-power": gamma_power,
    "plog": plog,
    "sinh-integral": sinh_integral,
    "mc-truncated": _mc_truncated,
}


def kernel_catalog():
    """One representative kernel per family of the N-function examples."""
    return [
        p_power(2.0),
        p_power(1.5),
        p_power(3.0),
        mixed(2.0, 4.0),
        gamma_power(2.0),
        plog(2.0),
        sinh_integral(0.5, 1.0),
    ]


def kernel_from_spec(spec):
    """Build a kernel from ``{"kind": ..., "params": {...}}``.

    Also accepts a JSON string of that form or the short form
    ``"p-power:p=2"``.
    """
    spec = parse_spec(spec)
    kind = spec["kind"]
    if kind not in BUILDERS:
        raise ConfigError(f"unknown kernel kind {kind!r}")
    try:
        return BUILDERS[kind](**spec["params"])
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {kind}: {exc}") from None


def parse_spec(spec):
    if isinstance(spec, dict):
        if "kind" not in spec:
            raise ConfigError("spec needs a 'kind' entry")
        return {"kind": spec["kind"], "params": dict(spec.get("params", {}))}
    if not isinstance(spec, str):
        raise ConfigError(f"cannot parse spec {spec!r}")
    s = spec.strip()
    if s.startswith("{"):
        try:
            return parse_spec(json.loads(s))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON spec: {exc}") from None
    kind, _, rest = s.partition(":")
    params = {}
    for item in filter(None, (x.strip() for x in rest.split(","))):
        name, eq, value = item.partition("=")
        if not eq:
            raise ConfigError(f"expected name=value in {item!r}")
        try:
            params[name.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"non-numeric value in {item!r}") from None
    return {"kind": kind.strip(), "params": params}


# ---------------------------------------------------------------- operations


def _quad(which, k, t, tol):
    if tol <= 0:
        raise ValueError("tol must be positive")
    scalar = np.ndim(t) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(tt < 0):
        raise ValueError("t must be nonnegative")
    out = _core.quad_map(which, k.code, k.par, tt.ravel(), tol, QUAD_MAX_DEPTH)
    if not np.all(np.isfinite(out)):
        raise EvaluationDomainError(f"non-finite integrand for {k.kind}")
    return float(out[0]) if scalar else out.reshape(tt.shape)


def big_phi(k, t, tol=DEFAULT_QUAD_TOL):
    """Phi(t) by adaptive Simpson quadrature of s phi(s)."""
    return _quad(_core.INTEG_PHI, k, t, tol)


def big_g(k, t, tol=DEFAULT_QUAD_TOL):
    """G(t) by adaptive Simpson quadrature of s (phi(s) s)'."""
    return _quad(_core.INTEG_G, k, t, tol)


def big_g_inverse(k, v, tol=DEFAULT_QUAD_TOL):
    """Solve G(t) = v for t >= 0.

    Geometric bracketing by factors of 4 around [0, 1], bisection to a
    relative width of 1e-3, then Newton on G'(t) = t (phi(t) t)' with a
    bisection fallback.
    """
    if v < 0:
        raise ValueError("v must be nonnegative")
    if v == 0:
        return 0.0
    t = float(_core.big_g_inverse_fast(k.code, k.par, float(v)))
    if t < 0 or not np.isfinite(t):
        raise UnboundedInverseError(f"no bracket for G(t) = {v} ({k.kind})")
    resid = abs(k.G(t) - v)
    if resid > tol * max(1.0, v):
        raise EvaluationDomainError(
            f"G^-1 residual {resid:.3g} above tolerance for {k.kind}")
    return t


def estimate_exponents(k, grid=None):
    """Sampled (l, m): 1 + min and 1 + max of (phi(t) t)'/phi(t)."""
    grid = CERT_GRID if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise ValueError("grid must be nonempty and positive")
    ph = k.phi(grid)
    if np.any(ph == 0) or not np.all(np.isfinite(ph)):
        raise HypothesisViolation(f"phi vanishes or blows up on the grid ({k.kind})")
    r = k.dflux(grid) / ph
    return 1.0 + float(r.min()), 1.0 + float(r.max())


def certify_kernel(k, grid=None, slack=CERT_SLACK):
    """Check phi > 0, (phi t)' > 0 and that the declared [l, m] contains the sampled range."""
    grid = CERT_GRID if grid is None else np.asarray(grid, dtype=float)
    ph = k.phi(grid)
    dfl = k.dflux(grid)
    phi1 = bool(np.all(ph > 0) and np.all(dfl > 0))
    l_est, m_est = estimate_exponents(k, grid)
    return {
        "phi1": phi1,
        "l_est": l_est,
        "m_est": m_est,
        "l": k.l,
        "m": k.m,
        "l_gt_1": k.l > 1,
        "exponents": bool(k.l - slack <= l_est and m_est <= k.m + slack),
        "certified": bool(phi1 and k.l > 1
                          and k.l - slack <= l_est and m_est <= k.m + slack),
    }


def legendre_conjugate(k, s, tol=DEFAULT_QUAD_TOL):
    """Complementary function max_{t>=0} (s t - Phi(t)).

    The maximiser solves phi(t) t = s, found by inverting the flux.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s == 0:
        return 0.0
    t = float(_core.flux_inverse(k.code, k.par, float(s)))
    if t < 0:
        raise UnboundedInverseError(f"no bracket for phi(t) t = {s}")
    val = s * t - k.Phi(t)
    if not np.isfinite(val):
        raise EvaluationDomainError(f"non-finite conjugate for {k.kind}")
    return float(val)


# ---------------------------------------------------------------- tabulation


@dataclass(frozen=True)
class BigPhiTable:
    """Phi and G sampled by quadrature, with monotone cubic interpolation."""

    grid: np.ndarray
    Phi_values: np.ndarray
    G_values: np.ndarray

    def Phi(self, t):
        return PchipInterpolator(self.grid, self.Phi_values, extrapolate=False)(t)

    def G(self, t):
        return PchipInterpolator(self.grid, self.G_values, extrapolate=False)(t)


def _cumulative(which, k, grid, tol):
    panel = np.empty(grid.size)
    panel[0] = _core.simpson(which, k.code, k.par, 0.0, grid[0], tol, QUAD_MAX_DEPTH)
    for i in range(1, grid.size):
        panel[i] = _core.simpson(which, k.code, k.par, grid[i - 1], grid[i],
                                 tol, QUAD_MAX_DEPTH)
    if not np.all(np.isfinite(panel)):
        raise EvaluationDomainError(f"non-finite integrand for {k.kind}")
    return np.cumsum(panel)


@functools.lru_cache(maxsize=64)
def _table_cached(key, t_max, n, tol):
    k = kernel_from_spec({"kind": key[0], "params": dict(key[1])})
    grid = np.linspace(0.0, t_max, n)
    phis = _cumulative(_core.INTEG_PHI, k, grid, tol)
    gs = _cumulative(_core.INTEG_G, k, grid, tol)
    for a in (grid, phis, gs):
        a.setflags(write=False)
    return BigPhiTable(grid, phis, gs)


def tabulate(k, t_max=10.0, n=2001, tol=DEFAULT_QUAD_TOL):
    """Memoised quadrature table of Phi and G on a uniform grid."""
    return _table_cached(k.key(), float(t_max), int(n), float(tol))
