"""Pure-numpy conditional inversion; fallback for the compiled ``_kernels``.

Solves ``P(X <= t y | Y = y) = U`` for ``t`` on the log scale.  The
conditional CDF in ``t`` is

    K(t) = ||g||_{D_t} * exp(-(||f||_{E_t} / t - ||g||_{E_t}) / y)

which is nondecreasing and right-continuous, so bisection on a bracket
``K(a) < U <= K(b)`` converges to the left-continuous inverse; a ``U`` that
falls inside a jump of ``K`` lands on the jump location.
"""

import numpy as np

from .spectral import (
    FAMILY_EXP_RATIO,
    FAMILY_LOGISTIC,
    FAMILY_UNIFORM,
    exp_ratio_tails,
    logistic_tails,
    uniform_tails,
)

TAU_MAX = 700.0
TAU_TOL = 1e-12

_TAILS = {
    FAMILY_LOGISTIC: logistic_tails,
    FAMILY_UNIFORM: uniform_tails,
    FAMILY_EXP_RATIO: exp_ratio_tails,
}


def family_norms(family, param, atom_ratio, atom_fw, atom_gw):
    """``t -> (||f||_{E_t}, ||g||_{D_t})`` for a closed-form family plus atoms."""
    tails = _TAILS[family]
    atom_ratio = np.asarray(atom_ratio, dtype=float)

    def norms_fn(t):
        f_e, g_d = tails(t, param)
        if atom_ratio.size:
            in_e = atom_ratio > t[:, None]
            f_e = f_e + (atom_fw * in_e).sum(axis=1)
            g_d = g_d + (atom_gw * ~in_e).sum(axis=1)
        return f_e, g_d

    return norms_fn


def _phi(norms_fn, tau, y, u):
    t = np.exp(tau)
    f_e, g_d = norms_fn(t)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        k = g_d * np.exp(-(f_e / t - (1.0 - g_d)) / y)
    return np.where(g_d > 0, k, 0.0) - u


def invert_conditional(norms_fn, y, u):
    """Vectorised inversion; returns ``x`` with NaN where no bracket was found."""
    y = np.ascontiguousarray(y, dtype=float)
    u = np.ascontiguousarray(u, dtype=float)
    n = y.size
    f0 = _phi(norms_fn, np.zeros(n), y, u)
    up = f0 >= 0
    a = np.where(up, -1.0, 0.0)
    b = np.where(up, 0.0, 1.0)
    failed = np.zeros(n, dtype=bool)

    # grow the bracket: downwards where K(1) >= U, upwards elsewhere
    for direction in (True, False):
        pending = np.flatnonzero(up == direction)
        while pending.size:
            probe = a[pending] if direction else b[pending]
            fp = _phi(norms_fn, probe, y[pending], u[pending])
            move = fp >= 0 if direction else fp < 0
            idx = pending[move]
            if direction:
                b[idx] = a[idx]
                a[idx] *= 2.0
                off = np.abs(a[idx]) > TAU_MAX
            else:
                a[idx] = b[idx]
                b[idx] *= 2.0
                off = np.abs(b[idx]) > TAU_MAX
            failed[idx[off]] = True
            pending = idx[~off]

    a[failed] = b[failed] = 0.0
    while True:
        width = b - a
        live = np.flatnonzero(width > TAU_TOL)
        if not live.size:
            break
        mid = 0.5 * (a[live] + b[live])
        stuck = (mid <= a[live]) | (mid >= b[live])
        fm = _phi(norms_fn, mid, y[live], u[live])
        right = fm >= 0
        b[live[right]] = mid[right]
        a[live[~right]] = mid[~right]
        if stuck.all():
            break
    x = y * np.exp(b)
    x[failed] = np.nan
    return x


def conditional_quantile(family, param, atom_ratio, atom_fw, atom_gw, y, u):
    """Same contract as the compiled kernel of the same name."""
    norms_fn = family_norms(family, param, atom_ratio, atom_fw, atom_gw)
    return invert_conditional(norms_fn, y, u)
