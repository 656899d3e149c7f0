"""Mean-curvature kernel 1/sqrt(1+t^2) and its truncation phi_L.

The mean-curvature kernel degenerates at infinity, so the problem is solved
with a kernel phi_L that agrees with it on [0, sqrt(L)], is a quadratic in t^2
on [sqrt(L), sqrt(L+1)] and constant beyond.  If the computed solution has
slopes below sqrt(L) it never sees the modification and solves the original
equation; the slope certificate records exactly that.
"""

from dataclasses import dataclass

import numpy as np

from . import _core
from .cauchy import SolverConfig, solve_cauchy
from .errors import ConstructionError, HetlabError
from .kernels import _make
from .potentials import quartic_well


@dataclass(frozen=True)
class TruncationParams:
    L: float
    x_L: float
    y_L: float
    l_L: float
    m_L: float = 2.0

    @classmethod
    def from_L(cls, L):
        if not L > 0:
            raise ConstructionError(f"L must be positive, got {L}")
        x = np.sqrt(1.0 + L) / (4.0 * (1.0 + L) ** 2)
        y = (4.0 * L + 3.0) * x
        return cls(float(L), float(x), float(y), lower_exponent(L), 2.0)

    @property
    def knots(self):
        return np.sqrt(self.L), np.sqrt(self.L + 1.0)


def lower_exponent(L):
    """Closed-form lower growth exponent of phi_L.

    (6L + 6 - L^2)/(4L + 4) for L <= 1, (7 + 4L)/(4L + 4) beyond.  This is a
    valid lower bound for (phi_L t)'/phi_L + 1 but not its infimum.
    """
    if L <= 1:
        return (6.0 * L + 6.0 - L * L) / (4.0 * L + 4.0)
    return (7.0 + 4.0 * L) / (4.0 * L + 4.0)


def truncated_kernel(L):
    """PhiKernel for phi_L with declared exponents (l_L, 2)."""
    tp = TruncationParams.from_L(L)
    return _make("mc-truncated", {"L": tp.L}, tp.l_L, tp.m_L,
                 [tp.L, tp.x_L, tp.y_L])


def phi_L(params, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    par = np.array([params.L, params.x_L, params.y_L])
    out = _core.kernel_map(_core.MAP_PHI, _core.K_MC, par, np.atleast_1d(t).ravel())
    return float(out[0]) if t.ndim == 0 else out.reshape(t.shape)


def mc_kernel_untruncated(t):
    t = np.asarray(t, dtype=float)
    return 1.0 / np.sqrt(1.0 + t * t)


@dataclass(frozen=True)
class SlopeCertificate:
    max_slope: float
    threshold: float
    passed: bool
    residual_sup: float
    sup_abs_V_prime: float = None   # over [well_low, well_high]

    def to_dict(self):
        return {"max_slope": self.max_slope, "threshold": self.threshold,
                "passed": self.passed, "residual_sup": self.residual_sup,
                "sup_abs_V_prime": self.sup_abs_V_prime}


def untruncated_residual(profile, k, P, h=1e-4, margin=2):
    """-(phi(|q'|) q')' + V'(q) with the untruncated kernel, by centred
    differences of step h on interior samples.

    q(t +- h) comes from one RK4 step of the reduced equation, q' from
    G_L^{-1}(V(q)).
    """
    q = profile.q[margin:-margin]
    args = (k.code, k.par, P.code, P.par, P.well_low, P.well_high)
    qp_p = np.empty_like(q)
    qp_m = np.empty_like(q)
    for i, y in enumerate(q):
        qp_p[i] = _core.rhs(*args, _core.rk4_shift(*args, y, h))
        qp_m[i] = _core.rhs(*args, _core.rk4_shift(*args, y, -h))
    w_p = mc_kernel_untruncated(qp_p) * qp_p
    w_m = mc_kernel_untruncated(qp_m) * qp_m
    return -(w_p - w_m) / (2.0 * h) + P.V_prime(q)


def solve_mc(P, L, cfg=None, residual_step=1e-4):
    """Solve with phi_L and certify max |q'| < sqrt(L).

    Returns (profile, SlopeCertificate).  A failed certificate is a signal,
    not an error: the caller may raise L or shrink the wells.
    """
    k = truncated_kernel(L)
    prof = solve_cauchy(k, P, cfg=cfg)
    smax = float(np.max(prof.q_prime))
    thr = float(np.sqrt(L))
    res = untruncated_residual(prof, k, P, residual_step)
    grid = np.linspace(P.well_low, P.well_high, 2001)
    vmax = float(np.max(np.abs(P.V_prime(grid))))
    cert = SlopeCertificate(smax, thr, bool(smax < thr), float(np.max(np.abs(res))),
                            vmax)
    return prof, cert


def solve_mc_schedule(P, L0=1.0, factor=2.0, L_max=64.0, cfg=None):
    """Try L = L0, L0*factor, ... until the certificate passes or L > L_max.

    Returns (profile, certificate, L) for the last attempt.
    """
    L = float(L0)
    while True:
        prof, cert = solve_mc(P, L, cfg)
        if cert.passed or L * factor > L_max:
            return prof, cert, L
        L *= factor


def kappa(L):
    tp = TruncationParams.from_L(L)
    return float(np.sqrt(tp.y_L * (tp.l_L - 1.0)))


def mc_sandwich_check(profile, alpha, slack=1e-9):
    """alpha tanh(alpha sqrt(2) t) <= q(t) <= alpha tanh(alpha sqrt(2) t / kappa)
    for t >= 0, kappa evaluated at L = max|q'|^2.  Signed margins.
    """
    L_eff = float(np.max(profile.q_prime)) ** 2
    kap = kappa(L_eff)
    sel = profile.t >= 0
    t, q = profile.t[sel], profile.q[sel]
    r = alpha * np.sqrt(2.0)
    m_low = q - alpha * np.tanh(r * t)
    m_up = alpha * np.tanh(r * t / kap) - q
    il, iu = int(np.argmin(m_low)), int(np.argmin(m_up))
    return {
        "L_eff": L_eff,
        "kappa": kap,
        "kappa_le_1": bool(kap <= 1.0),
        "lower_margin": float(m_low[il]),
        "lower_at": float(t[il]),
        "upper_margin": float(m_up[iu]),
        "upper_at": float(t[iu]),
        "passed": bool(m_low[il] >= -slack and m_up[iu] >= -slack),
    }


def sweep_cell(alpha, L, cfg=None):
    """One (alpha, L) cell of the frontier scan as a JSON-ready row."""
    row = {"alpha": alpha, "L": L}
    try:
        prof, cert = solve_mc(quartic_well(alpha), L, cfg)
    except HetlabError as exc:
        row.update(max_slope=None, passed=False, kappa=None, bound_margins=None,
                   error=f"{type(exc).__name__}: {exc}")
        return row
    sw = mc_sandwich_check(prof, alpha)
    row.update(max_slope=cert.max_slope, passed=cert.passed, kappa=sw["kappa"],
               bound_margins={"lower": sw["lower_margin"],
                              "upper": sw["upper_margin"]},
               residual_sup=cert.residual_sup,
               sup_abs_V_prime=cert.sup_abs_V_prime)
    return row
