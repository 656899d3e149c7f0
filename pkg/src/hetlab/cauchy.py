"""First-order reduction y' = G^{-1}(V(y)) and the closed-form solutions.

Along a heteroclinic the energy G(q') - V(q) vanishes, so q solves the
autonomous first-order problem above.  It is integrated forward from the
anchor towards the upper well and, through the reflected problem
z' = -f(z), backward towards the lower well.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import expit

from . import _core
from .errors import (ConfigError, EvaluationDomainError, FitDomainError,
                     StationaryStartError, StiffnessError)
from .profiles import HeteroclinicProfile

__all__ = ["SolverConfig", "HeteroclinicProfile", "solve_cauchy", "fit_decay",
           "DecayFit", "closed_form_oracle"]


@dataclass(frozen=True)
class SolverConfig:
    """Integrator settings.  ``None`` entries scale with the well gap:
    t_max = 40 / gap, tail_epsilon = 1e-12 * gap.
    """

    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    t_max: float = None
    tail_epsilon: float = None
    max_steps: int = 200_000
    sample_step: float = 1e-2

    def resolved(self, gap):
        t_max = 40.0 / gap if self.t_max is None else self.t_max
        eps = 1e-12 * gap if self.tail_epsilon is None else self.tail_epsilon
        for name, v in (("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol),
                        ("t_max", t_max), ("tail_epsilon", eps),
                        ("max_steps", self.max_steps),
                        ("sample_step", self.sample_step)):
            if not v > 0:
                raise ConfigError(f"{name} must be positive, got {v}")
        if not eps < 0.1 * gap:
            raise ConfigError("tail_epsilon must be below 0.1 * well gap")
        return t_max, eps


def _branch(k, P, anchor, direction, cfg, t_max, eps):
    out, rt, ry, status, steps = _core.integrate_branch(
        k.code, k.par, P.code, P.par, P.well_low, P.well_high, float(anchor),
        direction, cfg.sample_step, cfg.rel_tol, cfg.abs_tol, eps, t_max,
        int(cfg.max_steps))
    side = "forward" if direction > 0 else "backward"
    if status == _core.ST_STATIONARY:
        raise StationaryStartError(
            f"f(anchor) = 0 at anchor {anchor}: start is a rest point")
    if status == _core.ST_DOMAIN:
        raise EvaluationDomainError(f"non-finite right-hand side at {anchor}")
    if status == _core.ST_STIFF:
        raise StiffnessError(
            f"{side} step underflow after {steps} steps at t = "
            f"{direction * rt[-1]:.6g}, distance to well "
            f"{abs((P.well_high if direction > 0 else P.well_low) - ry[-1]):.3g}")
    if status == _core.ST_MAXSTEPS:
        raise StiffnessError(f"{side} integration hit max_steps={cfg.max_steps}")
    return out, rt, ry, status == _core.ST_OK


def solve_cauchy(k, P, anchor=None, cfg=None):
    """Heteroclinic profile of -(phi(|u'|)u')' + V'(u) = 0 with u(0) = anchor.

    ``anchor`` defaults to the midpoint of the wells.  Grid samples are at
    multiples of ``cfg.sample_step``; q' is recomputed as G^{-1}(V(q)) at
    every sample and the energy residual is G(q') - V(q).
    """
    cfg = SolverConfig() if cfg is None else cfg
    if P.code == -1:
        raise ConfigError("custom potentials cannot be integrated")
    anchor = P.midpoint if anchor is None else float(anchor)
    if not (P.well_low < anchor < P.well_high):
        raise StationaryStartError(
            f"anchor {anchor} is not strictly between the wells")
    t_max, eps = cfg.resolved(P.gap)
    fwd, frt, fry, f_ok = _branch(k, P, anchor, 1, cfg, t_max, eps)
    bwd, brt, bry, b_ok = _branch(k, P, anchor, -1, cfg, t_max, eps)

    h = cfg.sample_step
    q = np.concatenate([bwd[:0:-1], fwd])
    t = h * np.arange(-(len(bwd) - 1), len(fwd))
    qp = _core.rhs_map(k.code, k.par, P.code, P.par, P.well_low, P.well_high, q)
    resid = k.G(qp) - P.V(q)
    meta = {
        "kernel": k.to_spec(),
        "potential": P.to_spec(),
        "anchor": anchor,
        "reached_tail": bool(f_ok and b_ok),
        "steps": int(len(frt) + len(brt) - 2),
        "tail_epsilon": eps,
        "t_max": t_max,
    }
    return HeteroclinicProfile(
        t, q, qp, resid, (P.well_low, P.well_high), "cauchy", 0.0, meta,
        raw_t=np.concatenate([-brt[:0:-1], frt]),
        raw_q=np.concatenate([bry[:0:-1], fry]))


class DecayFit(NamedTuple):
    theta1: float
    theta2: float
    theta3: float
    theta4: float
    beta1: float
    beta2: float
    beta3: float
    beta4: float


def _logfit(t, y, what):
    if np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise FitDomainError(f"nonpositive {what} in the tail")
    slope, icpt = np.polyfit(t, np.log(y), 1)
    return float(np.exp(icpt)), float(slope)


def fit_decay(profile, tail_fraction=0.2):
    """Least-squares exponential fits on the outer tails.

    Right tail: well_high - q ~ theta1 exp(-theta2 t), q' ~ beta1 exp(-beta2 t).
    Left tail:  q - well_low ~ theta3 exp(theta4 t), q' ~ beta3 exp(beta4 t).
    """
    if not 0 < tail_fraction < 0.5:
        raise ValueError("tail_fraction must lie in (0, 0.5)")
    n = len(profile)
    m = max(3, int(tail_fraction * n))
    if 2 * m > n:
        raise FitDomainError("profile too short for the requested tails")
    lo, hi = profile.wells
    t, q, qp = profile.t, profile.q, profile.q_prime
    r, l_ = slice(n - m, n), slice(0, m)
    th1, s1 = _logfit(t[r], hi - q[r], "distance to upper well")
    th3, s3 = _logfit(t[l_], q[l_] - lo, "distance to lower well")
    b1, s5 = _logfit(t[r], qp[r], "derivative")
    b3, s7 = _logfit(t[l_], qp[l_], "derivative")
    return DecayFit(th1, -s1, th3, s3, b1, -s5, b3, s7)


def closed_form_oracle(kind, **params):
    """Exact heteroclinics for comparison.

    ``p_tanh`` (p, alpha): alpha tanh(alpha t / (p-1)^(1/p)), phi = t^(p-2),
    V = |t^2 - alpha^2|^p / p.
    ``asym_logistic`` (p, a, b): logistic from a to b with rate
    (b - a)/(p-1)^(1/p), midpoint at t = 0.
    ``quartic_classic`` (alpha): alpha tanh(sqrt(2) alpha t), the linear
    kernel phi = 1 with V = (t^2 - alpha^2)^2.
    """
    if kind == "p_tanh":
        p, alpha = params["p"], params["alpha"]
        c = (p - 1.0) ** (1.0 / p)
        return lambda t: alpha * np.tanh(alpha * np.asarray(t) / c)
    if kind == "asym_logistic":
        p, a, b = params["p"], params["a"], params["b"]
        if not b > a:
            raise ConfigError("asym_logistic needs a < b")
        c = (p - 1.0) ** (1.0 / p)
        return lambda t: a + (b - a) * expit((b - a) * np.asarray(t) / c)
    if kind == "quartic_classic":
        alpha = params["alpha"]
        return lambda t: alpha * np.tanh(np.sqrt(2.0) * alpha * np.asarray(t))
    raise ConfigError(f"unsupported oracle kind {kind!r}")


def oracle_for(k, P):
    """Closed-form solution matching (k, P) if one is known, else None."""
    if k.kind != "p-power":
        return None
    p = k.params["p"]
    if P.kind == "p-dw" and P.params["p"] == p:
        return closed_form_oracle("p_tanh", p=p, alpha=P.params["alpha"])
    if P.kind == "phi-dw" and P.kernel is not None and P.kernel.key() == k.key():
        return closed_form_oracle("p_tanh", p=p, alpha=P.params["alpha"])
    if P.kind == "asym" and P.params["p"] == p:
        return closed_form_oracle("asym_logistic", p=p, a=P.params["a"],
                                  b=P.params["b"])
    return None
