"""Discrete action minimisation on a truncated interval.

The action int Phi(|u'|) + V(u) dt is discretised on [-T, T] with clamped
endpoint values: forward differences for the kinetic term, trapezoid rule
for the potential.  Its minimiser is an independent approximation of the
heteroclinic, obtained without the energy identity.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_banded

from . import _core
from .errors import ConfigError, DescentStallError, NormalizationError
from .profiles import HeteroclinicProfile


@dataclass(frozen=True)
class DiscreteAction:
    T: float
    N: int
    boundary: tuple

    def __post_init__(self):
        if not self.T > 0 or self.N < 1:
            raise ConfigError(f"need T > 0 and N >= 1, got T={self.T}, N={self.N}")

    @property
    def h(self):
        return 2.0 * self.T / (self.N + 1)

    @property
    def nodes(self):
        """Interior node times -T + h, ..., T - h."""
        return -self.T + self.h * np.arange(1, self.N + 1)


def discrete_action(P, T=None, N=4001, tail_offset=0.0):
    """Truncated problem for P; T defaults to 24 / (well gap)."""
    T = 24.0 / P.gap if T is None else float(T)
    if not 0 <= tail_offset < 0.5 * P.gap:
        raise ConfigError("tail_offset must lie in [0, gap/2)")
    return DiscreteAction(T, int(N), (P.well_low + tail_offset,
                                      P.well_high - tail_offset))


def initial_ramp(D):
    """Clamped unit-slope ramp through the midpoint of the boundary values."""
    lo, hi = D.boundary
    return np.clip(0.5 * (lo + hi) + D.nodes, lo, hi)


def _check(D, u):
    u = np.ascontiguousarray(u, dtype=float)
    if u.shape != (D.N,):
        raise ValueError(f"expected {D.N} node values, got shape {u.shape}")
    return u


def action_value(D, k, P, u):
    u = _check(D, u)
    lo, hi = D.boundary
    return float(_core.action_only(k.code, k.par, P.code, P.par, u, lo, hi, D.h))


def action_gradient(D, k, P, u):
    """(action, gradient); d/dd Phi(|d|) = phi(|d|) d gives the kinetic part."""
    u = _check(D, u)
    lo, hi = D.boundary
    g = np.empty(D.N)
    a = _core.action_grad(k.code, k.par, P.code, P.par, u, lo, hi, D.h, g)
    return float(a), g


@dataclass(frozen=True)
class MinimizeOptions:
    method: str = "ncg"           # "ncg" (Polak-Ribiere+) or "sd"
    precondition: bool = True
    gtol: float = 1e-9            # sup-norm of the gradient
    max_iter: int = 5000
    armijo: float = 1e-4
    shrink: float = 0.5
    max_backtracks: int = 60
    wmin: float = 1e-8
    wmax: float = 1e8


_ROUNDOFF = 64 * np.finfo(float).eps


class MinimizeResult(NamedTuple):
    u: np.ndarray
    iterations: int
    grad_norm: float
    history: list
    converged: bool


def _precond(D, k, P, u, opts):
    lo, hi = D.boundary
    diag, off = _core.kinetic_bands(k.code, k.par, P.code, P.par, u, lo, hi,
                                    D.h, opts.wmin, opts.wmax)
    ab = np.zeros((3, D.N))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    return ab


def minimize_action(D, k, P, u0, opts=None):
    """Descent on the discrete action with Armijo backtracking.

    Stops when the gradient sup-norm drops below ``opts.gtol`` or at
    ``opts.max_iter``.  ``history`` holds the action after every accepted
    step and is nonincreasing.

    For p-power-like kernels with p != 2 the gradient has a round-off floor
    in the tails (the flux is singular or degenerate at zero slope), so the
    iteration cap may be reached with ``converged`` False.
    """
    opts = MinimizeOptions() if opts is None else opts
    if opts.method not in ("ncg", "sd"):
        raise ConfigError(f"unknown method {opts.method!r}")
    u = _check(D, u0).copy()
    if not np.all(np.isfinite(u)):
        raise ValueError("initial guess must be finite")

    a, g = action_gradient(D, k, P, u)
    hist = [a]

    def direction(u, g):
        if not opts.precondition:
            return g.copy()
        return solve_banded((1, 1), _precond(D, k, P, u, opts), g)

    z = direction(u, g)
    d = -z
    step = 1.0 if opts.precondition else D.h
    it = 0
    gnorm = float(np.max(np.abs(g)))
    while gnorm > opts.gtol and it < opts.max_iter:
        slope = float(g @ d)
        if slope >= 0:
            d = -z
            slope = float(g @ d)
        s = 1.0 if opts.precondition else 2.0 * step
        for _ in range(opts.max_backtracks):
            trial = u + s * d
            a_new = action_value(D, k, P, trial)
            if a_new <= a + opts.armijo * s * slope:
                break
            # predicted decrease below the resolution of the action itself:
            # settle for not increasing it
            if -s * slope < _ROUNDOFF * abs(a) and a_new <= a:
                break
            s *= opts.shrink
        else:
            trial = u
        if np.array_equal(trial, u):
            raise DescentStallError(
                f"line search failed at iteration {it}: action {a:.17g}, "
                f"gradient sup-norm {gnorm:.3g}", iterations=it, grad_norm=gnorm)
        step = s
        u = trial
        a, g_new = action_gradient(D, k, P, u)
        hist.append(a)
        z_new = direction(u, g_new)
        if opts.method == "ncg":
            beta = max(0.0, float(g_new @ (z_new - z)) / float(g @ z))
            d = -z_new + beta * d
        else:
            d = -z_new
        g, z = g_new, z_new
        gnorm = float(np.max(np.abs(g)))
        it += 1
    return MinimizeResult(u, it, gnorm, hist, gnorm <= opts.gtol)


def normalize_translation(t, u, anchor):
    """Shift times so the first upward crossing of ``anchor`` sits at 0.

    Returns (shifted times, shift); the crossing is located by linear
    interpolation.
    """
    t = np.asarray(t, dtype=float)
    w = np.asarray(u, dtype=float) - anchor
    idx = np.flatnonzero((w[:-1] <= 0) & (w[1:] > 0))
    if idx.size == 0:
        raise NormalizationError(f"profile never crosses the anchor {anchor}")
    i = idx[0]
    tc = t[i] - w[i] * (t[i + 1] - t[i]) / (w[i + 1] - w[i])
    return t - tc, float(-tc)


def solve_variational(k, P, T=None, N=4001, u0=None, opts=None, anchor=None):
    """Minimise from ``u0`` (default the ramp) and package as a profile.

    q' is taken by centred differences; the energy residual is therefore
    limited by discretisation, not by the optimiser.
    """
    D = discrete_action(P, T, N)
    u0 = initial_ramp(D) if u0 is None else u0
    res = minimize_action(D, k, P, u0, opts)
    anchor = P.midpoint if anchor is None else float(anchor)
    lo, hi = D.boundary
    full = np.concatenate([[lo], res.u, [hi]])
    qp = np.gradient(full, D.h)[1:-1]
    t, shift = normalize_translation(D.nodes, res.u, anchor)
    resid = k.G(np.abs(qp)) - P.V(res.u)
    meta = {"kernel": k.to_spec(), "potential": P.to_spec(), "anchor": anchor,
            "T": D.T, "N": D.N, "iterations": res.iterations,
            "grad_norm": res.grad_norm, "converged": bool(res.converged),
            "action": res.history[-1]}
    return HeteroclinicProfile(t, res.u, qp, resid, (P.well_low, P.well_high),
                               "variational", shift, meta)
