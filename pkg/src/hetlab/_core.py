"""Hot scalar and loop kernels.

Everything here is written so the same source runs under ``numba.njit``
and as plain Python (see ``_backend``).  Kernels and potentials are
dispatched on small integer codes plus a float parameter vector, which is
what lets numba compile one specialisation for every kernel family.

Failure inside a jitted routine is signalled through return values
(NaN, negative sentinels, status codes); the public modules translate
those into exceptions.
"""

import math

import numpy as np

from ._backend import jit

# kernel families
K_POWER = 0      # phi = t^(p-2)                       par: p
K_MIXED = 1      # phi = t^(p-2) + t^(q-2)             par: p, q
K_GAMMA = 2      # Phi = (1+t^2)^g - 1                 par: g
K_PLOG = 3       # Phi = t^p log(1+t)                  par: p
K_SINH = 4       # Phi = int s^(1-g) asinh(s)^b ds     par: g, b
K_MC = 5         # truncated mean curvature            par: L, x_L, y_L

# potential families
P_PHI_DW = 0     # Phi(|y^2 - a^2|)                    par: a
P_P_DW = 1       # |y^2 - a^2|^p / p                   par: p, a
P_QUARTIC = 2    # (y^2 - a^2)^2                       par: a
P_ASYM = 3       # |(y-a)(y-b)|^p / p                  par: p, a, b

# integrator status codes
ST_OK = 0
ST_TMAX = 1
ST_STATIONARY = 2
ST_STIFF = 3
ST_MAXSTEPS = 4
ST_DOMAIN = 5

INTEG_PHI = 0
INTEG_G = 1


@jit
def _pw(t, e):
    # t**e for t >= 0 with the limits at t == 0 spelled out
    if t == 0.0:
        if e > 0.0:
            return 0.0
        if e == 0.0:
            return 1.0
        return np.inf
    return t ** e


# ---------------------------------------------------------------- kernels


@jit
def phi(kind, par, t):
    if kind == K_POWER:
        return _pw(t, par[0] - 2.0)
    if kind == K_MIXED:
        return _pw(t, par[0] - 2.0) + _pw(t, par[1] - 2.0)
    if kind == K_GAMMA:
        g = par[0]
        return 2.0 * g * (1.0 + t * t) ** (g - 1.0)
    if kind == K_PLOG:
        p = par[0]
        if t == 0.0:
            return (p + 1.0) * _pw(t, p - 1.0)
        return p * _pw(t, p - 2.0) * math.log1p(t) + _pw(t, p - 1.0) / (1.0 + t)
    if kind == K_SINH:
        g = par[0]
        b = par[1]
        if t == 0.0:
            return _pw(t, b - g)
        return _pw(t, -g) * math.asinh(t) ** b
    if kind == K_MC:
        L = par[0]
        if t <= math.sqrt(L):
            return 1.0 / math.sqrt(1.0 + t * t)
        if t <= math.sqrt(L + 1.0):
            w = t * t - L - 1.0
            return par[1] * w * w + par[2]
        return par[2]
    return np.nan


@jit
def phi_prime(kind, par, t):
    if kind == K_POWER:
        p = par[0]
        return (p - 2.0) * _pw(t, p - 3.0)
    if kind == K_MIXED:
        p = par[0]
        q = par[1]
        return (p - 2.0) * _pw(t, p - 3.0) + (q - 2.0) * _pw(t, q - 3.0)
    if kind == K_GAMMA:
        g = par[0]
        return 4.0 * g * (g - 1.0) * t * (1.0 + t * t) ** (g - 2.0)
    if kind == K_PLOG:
        p = par[0]
        if t == 0.0:
            return (p + 1.0) * (p - 1.0) * _pw(t, p - 2.0)
        return (dflux(kind, par, t) - phi(kind, par, t)) / t
    if kind == K_SINH:
        g = par[0]
        b = par[1]
        if t == 0.0:
            return (b - g) * _pw(t, b - g - 1.0)
        a = math.asinh(t)
        return (-g * _pw(t, -g - 1.0) * a ** b
                + b * _pw(t, -g) * a ** (b - 1.0) / math.sqrt(1.0 + t * t))
    if kind == K_MC:
        L = par[0]
        if t <= math.sqrt(L):
            return -t / (1.0 + t * t) ** 1.5
        if t <= math.sqrt(L + 1.0):
            return 4.0 * par[1] * (t * t - L - 1.0) * t
        return 0.0
    return np.nan


@jit
def flux(kind, par, t):
    """phi(t) * t, written to stay finite at t = 0."""
    if kind == K_POWER:
        return _pw(t, par[0] - 1.0)
    if kind == K_MIXED:
        return _pw(t, par[0] - 1.0) + _pw(t, par[1] - 1.0)
    if kind == K_PLOG:
        p = par[0]
        return p * _pw(t, p - 1.0) * math.log1p(t) + _pw(t, p) / (1.0 + t)
    if kind == K_SINH:
        if t == 0.0:
            return 0.0
        return _pw(t, 1.0 - par[0]) * math.asinh(t) ** par[1]
    return phi(kind, par, t) * t


@jit
def dflux(kind, par, t):
    """Derivative of phi(t) * t."""
    if kind == K_POWER:
        p = par[0]
        return (p - 1.0) * _pw(t, p - 2.0)
    if kind == K_MIXED:
        p = par[0]
        q = par[1]
        return (p - 1.0) * _pw(t, p - 2.0) + (q - 1.0) * _pw(t, q - 2.0)
    if kind == K_GAMMA:
        g = par[0]
        s = 1.0 + t * t
        return 2.0 * g * s ** (g - 2.0) * (1.0 + (2.0 * g - 1.0) * t * t)
    if kind == K_PLOG:
        p = par[0]
        if t == 0.0:
            return (p + 1.0) * p * _pw(t, p - 1.0)
        return (p * (p - 1.0) * _pw(t, p - 2.0) * math.log1p(t)
                + 2.0 * p * _pw(t, p - 1.0) / (1.0 + t)
                - _pw(t, p) / ((1.0 + t) * (1.0 + t)))
    if kind == K_SINH:
        g = par[0]
        b = par[1]
        if t == 0.0:
            return (1.0 - g + b) * _pw(t, b - g)
        a = math.asinh(t)
        return ((1.0 - g) * _pw(t, -g) * a ** b
                + b * _pw(t, 1.0 - g) * a ** (b - 1.0) / math.sqrt(1.0 + t * t))
    if kind == K_MC:
        L = par[0]
        if t <= math.sqrt(L):
            return 1.0 / (1.0 + t * t) ** 1.5
        if t <= math.sqrt(L + 1.0):
            w = t * t - L - 1.0
            return par[1] * w * w + par[2] + 4.0 * par[1] * w * t * t
        return par[2]
    return np.nan


@jit
def _integrand(which, kind, par, s):
    if s == 0.0:
        return 0.0
    if which == INTEG_PHI:
        return flux(kind, par, s)
    return s * dflux(kind, par, s)


@jit
def simpson(which, kind, par, a, b, tol, maxdepth):
    """Adaptive Simpson on [a, b] with an explicit stack.

    A panel is accepted when its Richardson error estimate is below its
    share (by width) of ``tol``, or when ``maxdepth`` is reached.
    Returns NaN if the integrand is not finite somewhere.
    """
    if b <= a:
        return 0.0
    width = b - a
    size = 2 * maxdepth + 8
    sa = np.empty(size)
    sb = np.empty(size)
    sfa = np.empty(size)
    sfm = np.empty(size)
    sfb = np.empty(size)
    sw = np.empty(size)
    sd = np.empty(size, dtype=np.int64)
    fa = _integrand(which, kind, par, a)
    fb = _integrand(which, kind, par, b)
    fm = _integrand(which, kind, par, 0.5 * (a + b))
    if not (math.isfinite(fa) and math.isfinite(fb) and math.isfinite(fm)):
        return np.nan
    sa[0] = a
    sb[0] = b
    sfa[0] = fa
    sfm[0] = fm
    sfb[0] = fb
    sw[0] = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    sd[0] = 0
    top = 1
    total = 0.0
    while top > 0:
        top -= 1
        x0 = sa[top]
        x1 = sb[top]
        f0 = sfa[top]
        fmid = sfm[top]
        f1 = sfb[top]
        whole = sw[top]
        depth = sd[top]
        xm = 0.5 * (x0 + x1)
        fl = _integrand(which, kind, par, 0.5 * (x0 + xm))
        fr = _integrand(which, kind, par, 0.5 * (xm + x1))
        if not (math.isfinite(fl) and math.isfinite(fr)):
            return np.nan
        left = (xm - x0) / 6.0 * (f0 + 4.0 * fl + fmid)
        right = (x1 - xm) / 6.0 * (fmid + 4.0 * fr + f1)
        err = left + right - whole
        if depth >= maxdepth or abs(err) <= 15.0 * tol * (x1 - x0) / width:
            total += left + right + err / 15.0
        else:
            sa[top] = xm
            sb[top] = x1
            sfa[top] = fmid
            sfm[top] = fr
            sfb[top] = f1
            sw[top] = right
            sd[top] = depth + 1
            top += 1
            sa[top] = x0
            sb[top] = xm
            sfa[top] = f0
            sfm[top] = fl
            sfb[top] = fmid
            sw[top] = left
            sd[top] = depth + 1
            top += 1
    return total


@jit
def big_phi_fast(kind, par, t):
    """Phi(t) in closed form where one exists, quadrature otherwise."""
    if t <= 0.0:
        return 0.0
    if kind == K_POWER:
        p = par[0]
        return _pw(t, p) / p
    if kind == K_MIXED:
        p = par[0]
        q = par[1]
        return _pw(t, p) / p + _pw(t, q) / q
    if kind == K_GAMMA:
        return math.expm1(par[0] * math.log1p(t * t))
    if kind == K_PLOG:
        return _pw(t, par[0]) * math.log1p(t)
    if kind == K_MC:
        L = par[0]
        x = par[1]
        y = par[2]
        rL = math.sqrt(L)
        if t <= rL:
            return t * t / (math.sqrt(1.0 + t * t) + 1.0)
        base = L / (math.sqrt(1.0 + L) + 1.0)
        if t <= math.sqrt(L + 1.0):
            w = t * t - L - 1.0
            return base + x * (w * w * w + 1.0) / 6.0 + y * (t * t - L) / 2.0
        return base + x / 6.0 + y / 2.0 + y * (t * t - L - 1.0) / 2.0
    # no closed form: integrate s*phi(s)
    tol = 1e-14 * max(t * flux(kind, par, t), 1e-300)
    return simpson(INTEG_PHI, kind, par, 0.0, t, tol, 60)


@jit
def big_g_fast(kind, par, t):
    """G(t) through the identity G(t) = t^2 phi(t) - Phi(t)."""
    if t <= 0.0:
        return 0.0
    if kind == K_POWER:
        p = par[0]
        return (p - 1.0) * _pw(t, p) / p
    if kind == K_MIXED:
        p = par[0]
        q = par[1]
        return (p - 1.0) * _pw(t, p) / p + (q - 1.0) * _pw(t, q) / q
    return t * flux(kind, par, t) - big_phi_fast(kind, par, t)


@jit
def _monotone_inverse(which, kind, par, v):
    # solve F(t) = v for increasing F in {G, flux}; F(0) = 0
    # returns -1.0 when the bracket cannot be closed
    if v <= 0.0:
        return 0.0
    if not math.isfinite(v):
        return -1.0
    hi = 1.0
    if which == 0:
        fhi = big_g_fast(kind, par, hi)
    else:
        fhi = flux(kind, par, hi)
    if fhi < v:
        lo = hi
        while fhi < v:
            lo = hi
            hi *= 4.0
            if hi > 1e150:
                return -1.0
            if which == 0:
                fhi = big_g_fast(kind, par, hi)
            else:
                fhi = flux(kind, par, hi)
    else:
        lo = 0.25
        if which == 0:
            flo = big_g_fast(kind, par, lo)
        else:
            flo = flux(kind, par, lo)
        while flo >= v:
            hi = lo
            lo *= 0.25
            if lo < 1e-300:
                return lo
            if which == 0:
                flo = big_g_fast(kind, par, lo)
            else:
                flo = flux(kind, par, lo)
    while hi - lo > 1e-3 * hi:
        mid = 0.5 * (lo + hi)
        if which == 0:
            fm = big_g_fast(kind, par, mid)
        else:
            fm = flux(kind, par, mid)
        if fm < v:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    for _ in range(100):
        if which == 0:
            r = big_g_fast(kind, par, t) - v
            d = t * dflux(kind, par, t)
        else:
            r = flux(kind, par, t) - v
            d = dflux(kind, par, t)
        if r == 0.0:
            return t
        if r < 0.0:
            lo = t
        else:
            hi = t
        tn = t - r / d if d > 0.0 and math.isfinite(d) else 0.5 * (lo + hi)
        if not (lo < tn < hi):
            tn = 0.5 * (lo + hi)
        if abs(tn - t) <= 2e-16 * t or hi - lo <= 4e-16 * hi:
            return tn
        t = tn
    return t


@jit
def big_g_inverse_fast(kind, par, v):
    return _monotone_inverse(0, kind, par, v)


@jit
def flux_inverse(kind, par, s):
    return _monotone_inverse(1, kind, par, s)


@jit
def conjugate(kind, par, s):
    """Complementary function: s t* - Phi(t*) with phi(t*) t* = s."""
    if s <= 0.0:
        return 0.0
    t = flux_inverse(kind, par, s)
    if t < 0.0:
        return np.nan
    return s * t - big_phi_fast(kind, par, t)


# ------------------------------------------------------------- potentials


@jit
def pot_v(vkind, vpar, y):
    if vkind == P_PHI_DW:
        # vpar = [a, kernel code, kernel params...]
        a = vpar[0]
        return big_phi_fast(int(vpar[1]), vpar[2:], abs(y * y - a * a))
    if vkind == P_P_DW:
        p = vpar[0]
        a = vpar[1]
        return _pw(abs(y * y - a * a), p) / p
    if vkind == P_QUARTIC:
        a = vpar[0]
        w = y * y - a * a
        return w * w
    if vkind == P_ASYM:
        p = vpar[0]
        return _pw(abs((y - vpar[1]) * (y - vpar[2])), p) / p
    return np.nan


@jit
def pot_dv(vkind, vpar, y):
    if vkind == P_PHI_DW:
        a = vpar[0]
        w = y * y - a * a
        f = flux(int(vpar[1]), vpar[2:], abs(w))
        return 2.0 * y * f if w > 0.0 else -2.0 * y * f
    if vkind == P_P_DW:
        p = vpar[0]
        a = vpar[1]
        w = y * y - a * a
        f = _pw(abs(w), p - 1.0)
        return 2.0 * y * f if w > 0.0 else -2.0 * y * f
    if vkind == P_QUARTIC:
        a = vpar[0]
        return 4.0 * y * (y * y - a * a)
    if vkind == P_ASYM:
        p = vpar[0]
        w = (y - vpar[1]) * (y - vpar[2])
        f = _pw(abs(w), p - 1.0) * (2.0 * y - vpar[1] - vpar[2])
        return f if w > 0.0 else -f
    return np.nan


@jit
def rhs(kkind, kpar, vkind, vpar, lo, hi, y):
    """Right-hand side G^{-1}(V(y)) of the first-order reduction."""
    if y <= lo or y >= hi:
        return 0.0
    return big_g_inverse_fast(kkind, kpar, pot_v(vkind, vpar, y))


# ------------------------------------------------------------ array maps

MAP_PHI = 0
MAP_PHI_PRIME = 1
MAP_FLUX = 2
MAP_DFLUX = 3
MAP_BIG_PHI = 4
MAP_BIG_G = 5
MAP_G_INV = 6
MAP_FLUX_INV = 7
MAP_CONJ = 8


@jit
def kernel_map(which, kind, par, t):
    out = np.empty(t.shape[0])
    for i in range(t.shape[0]):
        x = t[i]
        if which == MAP_PHI:
            out[i] = phi(kind, par, x)
        elif which == MAP_PHI_PRIME:
            out[i] = phi_prime(kind, par, x)
        elif which == MAP_FLUX:
            out[i] = flux(kind, par, x)
        elif which == MAP_DFLUX:
            out[i] = dflux(kind, par, x)
        elif which == MAP_BIG_PHI:
            out[i] = big_phi_fast(kind, par, x)
        elif which == MAP_BIG_G:
            out[i] = big_g_fast(kind, par, x)
        elif which == MAP_G_INV:
            out[i] = big_g_inverse_fast(kind, par, x)
        elif which == MAP_FLUX_INV:
            out[i] = flux_inverse(kind, par, x)
        else:
            out[i] = conjugate(kind, par, x)
    return out


@jit
def quad_map(which, kind, par, t, tol, maxdepth):
    out = np.empty(t.shape[0])
    for i in range(t.shape[0]):
        out[i] = simpson(which, kind, par, 0.0, t[i], tol, maxdepth)
    return out


@jit
def pot_map(deriv, vkind, vpar, y):
    out = np.empty(y.shape[0])
    for i in range(y.shape[0]):
        if deriv:
            out[i] = pot_dv(vkind, vpar, y[i])
        else:
            out[i] = pot_v(vkind, vpar, y[i])
    return out


@jit
def rhs_map(kkind, kpar, vkind, vpar, lo, hi, y):
    out = np.empty(y.shape[0])
    for i in range(y.shape[0]):
        out[i] = rhs(kkind, kpar, vkind, vpar, lo, hi, y[i])
    return out


# -------------------------------------------------------------- integrator

# Dormand-Prince 5(4)
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (19372.0 / 6561.0, -25360.0 / 2187.0,
                          64448.0 / 6561.0, -212.0 / 729.0)
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0,
                                46732.0 / 5247.0, 49.0 / 176.0,
                                -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                           -2187.0 / 6784.0, 11.0 / 84.0)
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0,
                                71.0 / 1920.0, -17253.0 / 339200.0,
                                22.0 / 525.0, -1.0 / 40.0)


@jit
def integrate_branch(kkind, kpar, vkind, vpar, lo, hi, y0, direction,
                     dt_out, rtol, atol, tail_eps, t_max, max_steps):
    """Integrate y' = direction * f(y) from y0 on the grid k * dt_out.

    Steps are adaptive but always land on grid points, so grid samples are
    integrator nodes rather than interpolants.  Stops at the first grid
    point within ``tail_eps`` of the target well, or at ``t_max``.

    Returns (grid values, raw step times, raw step values, status, steps).
    """
    target = hi if direction > 0 else lo
    n_grid = int(t_max / dt_out * (1.0 + 1e-12)) + 1
    out = np.empty(n_grid)
    raw_t = np.empty(max_steps + 1)
    raw_y = np.empty(max_steps + 1)
    out[0] = y0
    raw_t[0] = 0.0
    raw_y[0] = y0
    k1 = direction * rhs(kkind, kpar, vkind, vpar, lo, hi, y0)
    if k1 == 0.0 or not math.isfinite(k1):
        st = ST_STATIONARY if k1 == 0.0 else ST_DOMAIN
        return out[:1], raw_t[:1], raw_y[:1], st, 0
    t = 0.0
    y = y0
    h_prop = dt_out
    steps = 0
    n = 1
    status = ST_TMAX
    for i in range(1, n_grid):
        t_end = i * dt_out
        while t < t_end:
            h = h_prop
            landing = False
            if t + h >= t_end - 1e-12 * dt_out:
                h = t_end - t
                landing = True
            k2 = direction * rhs(kkind, kpar, vkind, vpar, lo, hi,
                                 y + h * _A21 * k1)
            k3 = direction * rhs(kkind, kpar, vkind, vpar, lo, hi,
                                 y + h * (_A31 * k1 + _A32 * k2))
            k4 = direction * rhs(kkind, kpar, vkind, vpar, lo, hi,
                                 y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3))
            k5 = direction * rhs(kkind, kpar, vkind, vpar, lo, hi,
                                 y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3
                                          + _A54 * k4))
            k6 = direction * rhs(kkind, kpar, vkind, vpar, lo, hi,
                                 y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3
                                          + _A64 * k4 + _A65 * k5))
            ynew = y + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5
                            + _B6 * k6)
            if not math.isfinite(ynew) or ynew <= lo or ynew >= hi:
                h_prop = 0.25 * h
                if h_prop < 1e-13 * dt_out:
                    return out[:n], raw_t[:steps + 1], raw_y[:steps + 1], \
                        ST_STIFF, steps
                continue
            k7 = direction * rhs(kkind, kpar, vkind, vpar, lo, hi, ynew)
            err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6
                       + _E7 * k7)
            scale = atol + rtol * max(abs(y), abs(ynew))
            errn = abs(err) / scale
            if errn <= 1.0:
                t = t_end if landing else t + h
                y = ynew
                k1 = k7
                steps += 1
                raw_t[steps] = t
                raw_y[steps] = y
                if errn == 0.0:
                    fac = 5.0
                else:
                    fac = min(5.0, max(0.2, 0.9 * errn ** -0.2))
                if landing:
                    h_prop = max(h_prop, h * fac)
                else:
                    h_prop = h * fac
                if steps >= max_steps:
                    out[n] = y
                    n += 1
                    return out[:n], raw_t[:steps + 1], raw_y[:steps + 1], \
                        ST_MAXSTEPS, steps
            else:
                h_prop = h * max(0.2, 0.9 * errn ** -0.25)
                if h_prop < 1e-13 * dt_out:
                    return out[:n], raw_t[:steps + 1], raw_y[:steps + 1], \
                        ST_STIFF, steps
        out[n] = y
        n += 1
        if abs(target - y) < tail_eps:
            status = ST_OK
            break
    return out[:n], raw_t[:steps + 1], raw_y[:steps + 1], status, steps


@jit
def rk4_shift(kkind, kpar, vkind, vpar, lo, hi, y, h):
    """One classical RK4 step of y' = f(y) with signed step h."""
    k1 = rhs(kkind, kpar, vkind, vpar, lo, hi, y)
    k2 = rhs(kkind, kpar, vkind, vpar, lo, hi, y + 0.5 * h * k1)
    k3 = rhs(kkind, kpar, vkind, vpar, lo, hi, y + 0.5 * h * k2)
    k4 = rhs(kkind, kpar, vkind, vpar, lo, hi, y + h * k3)
    return y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


# ---------------------------------------------------------- discrete action


@jit
def action_grad(kkind, kpar, vkind, vpar, u, bl, br, h, grad):
    """Discrete action and its gradient (written into ``grad``).

    Cells c = 0..N join full[c] and full[c+1], full = [bl, u, br].
    Kinetic part uses forward differences, potential part the trapezoid
    rule.
    """
    n = u.shape[0]
    total = 0.0
    left = bl
    vleft = pot_v(vkind, vpar, bl)
    for i in range(n):
        grad[i] = h * pot_dv(vkind, vpar, u[i])
    for c in range(n + 1):
        right = br if c == n else u[c]
        vright = pot_v(vkind, vpar, right)
        d = (right - left) / h
        ad = abs(d)
        total += h * (big_phi_fast(kkind, kpar, ad) + 0.5 * (vleft + vright))
        fl = flux(kkind, kpar, ad)
        if d < 0.0:
            fl = -fl
        if c < n:
            grad[c] += fl
        if c > 0:
            grad[c - 1] -= fl
        left = right
        vleft = vright
    return total


@jit
def action_only(kkind, kpar, vkind, vpar, u, bl, br, h):
    n = u.shape[0]
    total = 0.0
    left = bl
    vleft = pot_v(vkind, vpar, bl)
    for c in range(n + 1):
        right = br if c == n else u[c]
        vright = pot_v(vkind, vpar, right)
        ad = abs(right - left) / h
        total += h * (big_phi_fast(kkind, kpar, ad) + 0.5 * (vleft + vright))
        left = right
        vleft = vright
    return total


@jit
def kinetic_bands(kkind, kpar, vkind, vpar, u, bl, br, h, wmin, wmax):
    """SPD tridiagonal approximation of the action Hessian.

    Kinetic weights are clipped to [wmin, wmax]; the potential curvature
    enters only through its positive part.
    """
    n = u.shape[0]
    diag = np.empty(n)
    off = np.empty(n - 1) if n > 1 else np.empty(0)
    w = np.empty(n + 1)
    left = bl
    for c in range(n + 1):
        right = br if c == n else u[c]
        ad = abs(right - left) / h
        wc = dflux(kkind, kpar, ad)
        if not math.isfinite(wc) or wc > wmax:
            wc = wmax
        elif wc < wmin:
            wc = wmin
        w[c] = wc / h
        left = right
    for i in range(n):
        y = u[i]
        e = 1e-6 * max(1.0, abs(y))
        curv = (pot_dv(vkind, vpar, y + e)
                - pot_dv(vkind, vpar, y - e)) / (2.0 * e)
        if not math.isfinite(curv) or curv < 0.0:
            curv = 0.0
        diag[i] = w[i] + w[i + 1] + h * curv
        if i < n - 1:
            off[i] = -w[i + 1]
    return diag, off
