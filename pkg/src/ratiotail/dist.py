"""Distribution functions of spectral models.

Everything here reduces to the split of ``[0, 1]`` into

    D_t = {s : f(s) / g(s) <= t}      E_t = complement of D_t

and the integrals ``||f||_{E_t}`` and ``||g||_{D_t}``.  Atoms whose ratio
equals ``t`` exactly belong to ``D_t``; that choice makes the ratio CDF
right-continuous.

Two evaluation paths exist.  ``method="closed"`` uses the density family's
closed forms (atoms are always summed exactly); ``method="quad"`` solves the
threshold ``f/g = t`` by bisection and integrates by adaptive quadrature.
``method="auto"`` prefers the closed form when the model has one.
"""

from __future__ import annotations

import math
import threading
from typing import NamedTuple

import numpy as np

from .errors import ModelError, NormingError
from .spectral import SpectralModel

SIDES = ("plus", "minus")


class Norms(NamedTuple):
    f_E: float
    g_D: float
    g_E: float


def _side_model(model: SpectralModel, side: str) -> SpectralModel:
    if side == "plus":
        return model
    if side == "minus":
        return model.mirror
    raise ModelError(f"side must be 'plus' or 'minus', got {side!r}")


def _use_closed(model: SpectralModel, method: str) -> bool:
    if method == "quad":
        return False
    if method == "closed":
        if not model.has_closed_form:
            raise ModelError(f"{model!r} has no closed form")
        return True
    if method == "auto":
        return model.has_closed_form
    raise ModelError(f"method must be 'auto', 'closed' or 'quad', got {method!r}")


def _atom_parts(model: SpectralModel, t):
    r, fw, gw = model.atom_arrays
    t = np.asarray(t, dtype=float)
    if r.size == 0:
        z = np.zeros_like(t)
        return z, z.copy()
    in_e = r > t[..., None]
    return (fw * in_e).sum(axis=-1), (gw * ~in_e).sum(axis=-1)


def norms(model: SpectralModel, t, method: str = "auto") -> Norms:
    """``(||f||_{E_t}, ||g||_{D_t}, ||g||_{E_t})`` at threshold ``t >= 0``.

    With a closed form available ``t`` may be an array.
    """
    closed = _use_closed(model, method)
    if closed:
        t_arr = np.asarray(t, dtype=float)
        f_e, g_d = _atom_parts(model, t_arr)
        if model.density is not None:
            df, dg = model.density.tails(t_arr)
            f_e = f_e + df
            g_d = g_d + dg
        if t_arr.ndim == 0:
            f_e, g_d = float(f_e), float(g_d)
        return Norms(f_e, g_d, 1.0 - g_d)

    t = float(t)
    f_e, g_d = (float(v) for v in _atom_parts(model, t))
    d = model.density
    if d is not None:
        s_star = d.threshold(t)
        f_e += d.integrate(d.f, s_star, 1.0)
        g_d += d.integrate(d.g, 0.0, s_star)
    return Norms(f_e, g_d, 1.0 - g_d)


def _check_t(t: float, name: str = "t") -> float:
    t = float(t)
    if not t > 0 or not math.isfinite(t):
        raise ModelError(f"{name} must be positive and finite, got {t}")
    return t


def norm_f_Et(model: SpectralModel, t: float, method: str = "auto") -> float:
    return norms(model, _check_t(t), method).f_E


def norm_g_Dt(model: SpectralModel, t: float, method: str = "auto") -> float:
    return norms(model, _check_t(t), method).g_D


def gamma(model: SpectralModel, side: str, t: float, method: str = "auto") -> float:
    """``gamma_side(t) = ||f||_{E_t} / t`` (f and g exchanged for ``minus``)."""
    t = _check_t(t)
    return norms(_side_model(model, side), t, method).f_E / t


def log_gamma(model: SpectralModel, side: str, t: float) -> float:
    """``log gamma_side(t)``, exact in the far tail where ``gamma`` underflows."""
    t = _check_t(t)
    m = _side_model(model, side)
    f_atoms = float(_atom_parts(m, t)[0])
    d = m.density
    if d is not None and d.log_f_tail is not None:
        with np.errstate(divide="ignore"):
            log_atoms = math.log(f_atoms) if f_atoms > 0 else -math.inf
        return float(np.logaddexp(log_atoms, d.log_f_tail(t))) - math.log(t)
    g = gamma(model, side, t)
    return math.log(g) if g > 0 else -math.inf


def rv_probe(model: SpectralModel, side: str, t: float, x: float = 2.0) -> float:
    """``gamma(x t) / gamma(t)``; tends to ``x**-alpha`` when gamma is in RV_-alpha."""
    a, b = log_gamma(model, side, x * t), log_gamma(model, side, t)
    if b == -math.inf:
        raise NormingError("gamma vanishes at t: the ratio is bounded")
    return math.exp(a - b)


def ratio_tail_index(model: SpectralModel, side: str = "plus", t: float = 1e6) -> float:
    """Numerical ratio tail index ``-log2(gamma(2t)/gamma(t))`` at large ``t``.

    ``inf`` when gamma decays faster than any power at ``t``.
    """
    r = rv_probe(model, side, t, 2.0)
    return -math.log2(r) if r > 0 else math.inf


class GammaFn:
    """Memoised ``t -> gamma_side(t)`` for one model.

    The cache is guarded by a lock so instances can be shared across
    threads; values never depend on evaluation order.
    """

    def __init__(self, model: SpectralModel, side: str = "plus", method: str = "auto"):
        _side_model(model, side)
        self.model = model
        self.side = side
        self.method = method
        self.closed_form = _use_closed(_side_model(model, side), method)
        self._cache: dict = {}
        self._lock = threading.Lock()

    def __call__(self, t: float) -> float:
        t = float(t)
        with self._lock:
            hit = self._cache.get(t)
        if hit is not None:
            return hit
        val = gamma(self.model, self.side, t, self.method)
        with self._lock:
            self._cache.setdefault(t, val)
        return val

    def __repr__(self) -> str:
        path = "closed" if self.closed_form else "quad"
        return f"GammaFn({self.model!r}, side={self.side}, path={path})"


def joint_cdf(model: SpectralModel, x: float, y: float, method: str = "auto") -> float:
    x, y = _check_t(x, "x"), _check_t(y, "y")
    n = norms(model, x / y, method)
    return math.exp(-(n.f_E / x + n.g_D / y))


def conditional_cdf(model: SpectralModel, x: float, y: float, method: str = "auto") -> float:
    """``P(X <= x | Y = y)``."""
    x, y = _check_t(x, "x"), _check_t(y, "y")
    n = norms(model, x / y, method)
    return n.g_D * math.exp(-n.f_E / x + n.g_E / y)


def _bracket(c: float, u: float) -> float:
    # 1 - exp(-c/u), with the u = 0 limit equal to 1
    if u == 0:
        return 1.0
    return -math.expm1(-c / u)


def _check_u(u: float) -> float:
    u = float(u)
    if not u >= 0 or not math.isfinite(u):
        raise ModelError(f"u must be finite and >= 0, got {u}")
    return u


def ratio_joint(model: SpectralModel, t: float, u: float = 0.0, method: str = "auto") -> float:
    """``P(X/Y <= t, Y > u)``; with ``u = 0`` this is the CDF of ``X/Y``."""
    t, u = float(t), _check_u(u)
    if not t >= 0 or not math.isfinite(t):
        raise ModelError(f"t must be finite and >= 0, got {t}")
    n = norms(model, t, method)
    if t == 0:
        if n.g_D == 0:
            raise ModelError("degenerate ratio law at t = 0: ||g||_{D_0} = 0")
        return 0.0
    p = t * n.g_D / (t * n.g_D + n.f_E)
    return p * _bracket(n.g_D + n.f_E / t, u)


def ratio_tail(model: SpectralModel, t: float, u: float = 0.0, method: str = "auto") -> float:
    """``P(X(u)/Y(u) > t)`` for ``t >= 1``, with ``Z(u) = max(Z, u)``."""
    t, u = float(t), _check_u(u)
    if not t >= 1 or not math.isfinite(t):
        raise ModelError(f"ratio_tail needs finite t >= 1, got {t}")
    n = norms(model, t, method)
    if n.f_E == 0:
        return 0.0
    p = n.f_E / (n.f_E + t * n.g_D)
    return p * _bracket(n.g_D + n.f_E / t, u)


def tail_dependence(model: SpectralModel) -> float:
    """``lim P(X > t | Y > t) = integral min(f, g) dmu``, by quadrature."""
    _, fw, gw = model.atom_arrays
    lam = float(np.minimum(fw, gw).sum())
    d = model.density
    if d is not None:
        # f <= g on D_1 and f > g on E_1
        cross = d.threshold(1.0)
        lam += d.integrate(d.f, 0.0, cross) + d.integrate(d.g, cross, 1.0)
    return lam


def norming(
    model: SpectralModel,
    side: str,
    n: int,
    u: float = 0.0,
    u_n: float | None = None,
    method: str = "auto",
) -> float:
    """Left-continuous inverse ``(1/gamma)^<-(C n)`` with ``C = 1 - exp(-1/u)``.

    With ``u_n`` given the target is ``n / u_n`` instead (diverging
    thresholds).  Raises ``NormingError`` when the ratio is bounded.
    """
    if int(n) != n or n < 1:
        raise ModelError(f"n must be a positive integer, got {n}")
    m = _side_model(model, side)
    if not m.ratio_unbounded():
        raise NormingError(f"{model!r} has a bounded {side} ratio; gamma vanishes eventually")
    if u_n is not None:
        if not u_n > 0:
            raise ModelError("u_n must be positive")
        target = n / float(u_n)
    else:
        target = _bracket(1.0, _check_u(u)) * n

    gfn = GammaFn(model, side, method)

    def reached(s: float) -> bool:
        g = gfn(s)
        return g == 0 or 1.0 / g >= target

    lo, hi = 1.0, 1.0
    if reached(hi):
        while reached(lo):
            lo /= 2.0
            if lo < 1e-300:
                return lo
        hi = 2.0 * lo
    else:
        while not reached(hi):
            lo, hi = hi, 2.0 * hi
            if hi > 1e300:
                raise NormingError("could not bracket the norming constant")
    # invariant: not reached(lo), reached(hi)
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if reached(mid):
            hi = mid
        else:
            lo = mid
    return hi
