"""Checks every heteroclinic must pass, collected into one report.

Each check yields a signed margin (positive means it passed with that much
room) and the time at which the margin is worst.  Checks that do not apply
to a configuration are listed as skipped with the reason.
"""

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .cauchy import FitDomainError, fit_decay, oracle_for
from .errors import TailBoundError
from .kernels import certify_kernel

CHECKS = ("monotonicity", "strict_bounds", "positive_derivative",
          "energy_residual", "sandwich", "decay_fit", "symmetry", "oracle",
          "finite_action")

PASS, FAIL, SKIP = "pass", "fail", "skipped"


class Check(NamedTuple):
    name: str
    status: str
    margin: float = None
    at: float = None
    detail: dict = None


@dataclass(frozen=True)
class VerifyOptions:
    """``None`` tolerances depend on the route: 1e-8 (bound slack 1e-9,
    symmetry 1e-10) for cauchy profiles, 5e-3 for variational ones, whose
    accuracy is limited by the grid."""

    energy_tol: float = None
    oracle_tol: float = None
    symmetry_tol: float = None
    bound_slack: float = None
    tail_fraction: float = 0.2
    rate_rel_tol: float = 0.05

    def tol(self, name, route):
        v = getattr(self, name)
        if v is not None:
            return v
        if name == "symmetry_tol":
            return 1e-10 if route == "cauchy" else 5e-3
        if name == "bound_slack":
            return 1e-9 if route == "cauchy" else 5e-3
        return 1e-8 if route == "cauchy" else 5e-3


@dataclass(frozen=True)
class VerificationReport:
    checks: list
    profile_meta: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.status != FAIL for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {"passed": self.passed, "profile_meta": self.profile_meta,
                "checks": [c._asdict() for c in self.checks]}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def table(self):
        lines = [f"{'check':<20} {'status':<8} {'margin':>24} {'at t':>12}"]
        for c in self.checks:
            m = "" if c.margin is None else "%.17g" % c.margin
            t = "" if c.at is None else "%.6g" % c.at
            lines.append(f"{c.name:<20} {c.status:<8} {m:>24} {t:>12}")
        return "\n".join(lines)


def _worst(margin, t, ok=None, detail=None, name=None):
    i = int(np.argmin(margin))
    m = float(margin[i])
    passed = m >= 0 if ok is None else ok(m)
    return Check(name, PASS if passed else FAIL, m, float(t[i]), detail)


def sandwich_rates(l, m):
    """(lower rate, upper rate, case) for alpha tanh(alpha r t) bounds."""
    if l - 1.0 <= 1.0 <= m - 1.0:
        return 1.0 / (m - 1.0), 1.0 / (l - 1.0), "i"
    if l - 1.0 > 1.0:
        return 1.0 / (m - 1.0), 1.0, "ii"
    return 1.0, 1.0 / (l - 1.0), "iii"


def sandwich_margins(profile, alpha, l, m):
    """Signed margins q - lower and upper - q for t >= 0."""
    lo_r, up_r, case = sandwich_rates(l, m)
    sel = profile.t >= 0
    t, q = profile.t[sel], profile.q[sel]
    low = q - alpha * np.tanh(alpha * lo_r * t)
    up = alpha * np.tanh(alpha * up_r * t) - q
    return t, low, up, case


def _mirror(profile, mid):
    """q(t) + q(-t) - 2 mid for t >= 0 where -t is covered."""
    t, q = profile.t, profile.q
    h = np.min(np.diff(t))
    pos = np.flatnonzero((t >= 0) & (-t >= t[0]))
    j = np.clip(np.searchsorted(t, -t[pos]), 0, len(t) - 1)
    if np.all(np.abs(t[j] + t[pos]) <= 1e-9 * h):
        qm = q[j]
    else:
        qm = profile.interpolate(-t[pos])
    return t[pos], q[pos] + qm - 2.0 * mid


def _tail_integral(t, f, fraction):
    """Integral of f beyond the last sample, f fitted as A exp(-lam t)."""
    if f[-1] == 0.0:
        return 0.0
    m = max(3, int(fraction * len(t)))
    tt, ff = t[-m:], f[-m:]
    if np.any(ff <= 0):
        raise TailBoundError("integrand vanishes inside the tail window")
    slope, _ = np.polyfit(tt, np.log(ff), 1)
    if not slope < 0:
        raise TailBoundError(f"tail integrand does not decay (rate {-slope:.3g})")
    return float(f[-1] / -slope)


def finite_action(profile, k, P, tail_fraction=0.2):
    """Trapezoid integral of Phi(|q'|) + V(q) plus exponential tail corrections."""
    t = profile.t
    f = k.Phi(np.abs(profile.q_prime)) + P.V(profile.q)
    if not np.all(np.isfinite(f)):
        raise TailBoundError("non-finite action density")
    body = float(np.trapezoid(f, t)) if hasattr(np, "trapezoid") else float(np.trapz(f, t))
    right = _tail_integral(t, f, tail_fraction)
    left = _tail_integral(-t[::-1], f[::-1], tail_fraction)
    return body + right + left


def _is_phi_double_well(P, k):
    """V = Phi(|t^2 - alpha^2|) for this kernel (p-dw is that for p-power)."""
    if P.kind == "phi-dw":
        return P.kernel is not None and P.kernel.key() == k.key()
    return (P.kind == "p-dw" and k.kind == "p-power"
            and P.params["p"] == k.params["p"])


def run_all(profile, k, P, options=None):
    opts = VerifyOptions() if options is None else options
    route = profile.route
    t, q, qp = profile.t, profile.q, profile.q_prime
    lo, hi = profile.wells
    checks = []

    tm = 0.5 * (t[:-1] + t[1:])
    checks.append(_worst(np.diff(q), tm, ok=lambda m: m > 0, name="monotonicity"))
    checks.append(_worst(np.minimum(q - lo, hi - q), t, ok=lambda m: m > 0,
                         name="strict_bounds"))
    checks.append(_worst(qp, t, ok=lambda m: m > 0, name="positive_derivative"))

    tol = opts.tol("energy_tol", route)
    res = k.G(np.abs(qp)) - P.V(q)
    checks.append(_worst(tol - np.abs(res), t, name="energy_residual",
                         detail={"tol": tol}))

    cert = certify_kernel(k)
    same_kernel = _is_phi_double_well(P, k)
    if not cert["certified"]:
        checks.append(Check("sandwich", SKIP, detail={"reason": "kernel exponents not certified"}))
    elif not same_kernel:
        checks.append(Check("sandwich", SKIP, detail={
            "reason": "bounds need V = Phi(|t^2 - alpha^2|) built from this kernel"}))
    else:
        alpha = P.params["alpha"]
        ts, low, up, case = sandwich_margins(profile, alpha, k.l, k.m)
        both = np.minimum(low, up)
        slack = opts.tol("bound_slack", route)
        checks.append(_worst(both, ts, ok=lambda m: m >= -slack,
                             name="sandwich",
                             detail={"case": case, "l": k.l, "m": k.m,
                                     "slack": slack,
                                     "lower_margin": float(low.min()),
                                     "upper_margin": float(up.min())}))

    oracle = oracle_for(k, P)
    try:
        fit = fit_decay(profile, opts.tail_fraction)
        rates = (fit.theta2, fit.theta4, fit.beta2, fit.beta4)
        amps = (fit.theta1, fit.theta3, fit.beta1, fit.beta3)
        detail = fit._asdict()
        margin = min(rates + amps)
        ok = margin > 0
        if oracle is not None and route == "cauchy":
            c = (k.params["p"] - 1.0) ** (1.0 / k.params["p"])
            expect = P.gap / c
            err = max(abs(r - expect) / expect for r in rates)
            detail.update(expected_rate=expect, rate_rel_err=err)
            ok = ok and err <= opts.rate_rel_tol
        checks.append(Check("decay_fit", PASS if ok else FAIL, float(margin), None, detail))
    except FitDomainError as exc:
        checks.append(Check("decay_fit", FAIL, detail={"error": str(exc)}))

    if P.is_symmetric():
        tol = opts.tol("symmetry_tol", route)
        ts, d = _mirror(profile, P.midpoint)
        checks.append(_worst(tol - np.abs(d), ts, name="symmetry",
                             detail={"tol": tol, "sup": float(np.max(np.abs(d)))}))
    else:
        checks.append(Check("symmetry", SKIP, detail={"reason": "potential is not even"}))

    if oracle is None:
        checks.append(Check("oracle", SKIP, detail={"reason": "no closed form"}))
    else:
        tol = opts.tol("oracle_tol", route)
        err = np.abs(q - oracle(t))
        checks.append(_worst(tol - err, t, name="oracle",
                             detail={"tol": tol, "sup": float(err.max())}))

    try:
        val = finite_action(profile, k, P, opts.tail_fraction)
        ok = np.isfinite(val) and val >= 0
        checks.append(Check("finite_action", PASS if ok else FAIL, float(val), None,
                            {"action": float(val)}))
    except TailBoundError as exc:
        checks.append(Check("finite_action", FAIL, detail={"error": str(exc)}))

    meta = {"route": route, "kernel": k.to_spec(), "potential": P.to_spec(),
            "n_samples": len(profile), "normalization_shift": profile.normalization_shift}
    return VerificationReport(checks, meta)
