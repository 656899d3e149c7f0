"""Sampled checks of the standard N-function inequalities.

Each suite draws points log-uniformly (and with random signs where the
inequality allows them) and reports the worst signed margin, scaled by the
size of the two sides so that a margin of -1e-9 means a relative violation
of 1e-9.
"""

import numpy as np

SUITES = ("envelope", "young", "conjugate_doubling", "quasi_triangle",
          "monotone_flux")


def _margin(lhs, rhs):
    """Relative slack of lhs <= rhs."""
    scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1e-300)
    return (rhs - lhs) / scale


def _summary(margin, where, slack):
    i = int(np.argmin(margin))
    return {"n": int(margin.size), "min_margin": float(margin[i]),
            "worst_at": [float(x) for x in where[i]],
            "passed": bool(margin[i] >= -slack)}


def _logu(rng, n, lo, hi):
    return 10.0 ** rng.uniform(lo, hi, n)


def envelope(k, s, t):
    """min(t^l, t^m) Phi(s) <= Phi(s t) <= max(t^l, t^m) Phi(s)."""
    ps, pst = k.Phi(s), k.Phi(s * t)
    a, b = t ** k.l, t ** k.m
    return np.minimum(_margin(np.minimum(a, b) * ps, pst),
                      _margin(pst, np.maximum(a, b) * ps))


def young(k, s, t):
    """s t <= Phi(t) + Phi~(s)."""
    return _margin(s * t, k.Phi(t) + k.conjugate(s))


def conjugate_doubling(k, t):
    """Phi~(phi(t) t) <= Phi(2 t)."""
    return _margin(k.conjugate(k.flux(t)), k.Phi(2.0 * t))


def quasi_triangle(k, s, r):
    """Phi(|s + r|) <= 2^m (Phi(|s|) + Phi(|r|))."""
    return _margin(k.Phi(np.abs(s + r)), 2.0 ** k.m * (k.Phi(s) + k.Phi(r)))


def monotone_flux(k, s, r):
    """(phi(|s|) s - phi(|r|) r)(s - r) > 0 for s != r; margin is the
    product over (|F(s)| + |F(r)|)(|s| + |r|)."""
    fs = np.sign(s) * k.flux(np.abs(s))
    fr = np.sign(r) * k.flux(np.abs(r))
    return (fs - fr) * (s - r) / ((np.abs(fs) + np.abs(fr)) * (np.abs(s) + np.abs(r)))


def run_suites(k, n=10_000, seed=0, slack=1e-9, decades=(-3.0, 3.0)):
    """All five suites on ``n`` samples each; dict keyed by suite name."""
    rng = np.random.default_rng(seed)
    lo, hi = decades
    out = {}
    s, t = _logu(rng, n, lo, hi), _logu(rng, n, -1.5, 1.5)
    out["envelope"] = _summary(envelope(k, s, t), np.c_[s, t], slack)
    s, t = _logu(rng, n, lo, hi), _logu(rng, n, lo, hi)
    out["young"] = _summary(young(k, s, t), np.c_[s, t], slack)
    t = _logu(rng, n, lo, hi)
    out["conjugate_doubling"] = _summary(conjugate_doubling(k, t), t[:, None], slack)
    s = _logu(rng, n, lo, hi) * rng.choice([-1.0, 1.0], n)
    r = _logu(rng, n, lo, hi) * rng.choice([-1.0, 1.0], n)
    out["quasi_triangle"] = _summary(quasi_triangle(k, s, r), np.c_[s, r], slack)
    s = _logu(rng, n, lo, hi) * rng.choice([-1.0, 1.0], n)
    r = _logu(rng, n, lo, hi) * rng.choice([-1.0, 1.0], n)
    m = monotone_flux(k, s, r)
    summ = _summary(m, np.c_[s, r], 0.0)
    summ["passed"] = bool(np.all(m > 0))
    out["monotone_flux"] = summ
    return out
