"""Spectral models of standard bivariate 1-Fréchet vectors.

A model is a triple ``(f, g, mu)`` on ``[0, 1]`` where ``mu`` is a finite sum
of point masses plus an optional density against Lebesgue measure.  The joint
law is

    P(X <= x, Y <= y) = exp(-integral max(f/x, g/y) dmu)

and the model is *standard* when ``integral f dmu = integral g dmu = 1``.

Every model kept by this package has a nondecreasing ratio ``f/g`` along
``[0, 1]`` (with ``1/0 = inf``), so the level sets ``{f/g > t}`` are upper
intervals plus a set of atoms.

The closed-form helpers ``*_tails`` return, for a density family, the pair

    f_tail(t) = integral over {f/g >  t} of f h ds
    g_head(t) = integral over {f/g <= t} of g h ds

evaluated elementwise on arrays of thresholds.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, special

from .errors import ModelError, QuadratureError

# Density families understood by the compiled sampling kernel.
FAMILY_NONE = 0
FAMILY_LOGISTIC = 1
FAMILY_UNIFORM = 2  # standard form f = 2s, g = 2(1 - s), constant density
FAMILY_EXP_RATIO = 3

QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-10
QUAD_FALLBACK_ABS = 1e-9

_E1_AT_1 = float(special.exp1(1.0))


def _ratio(f, g):
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(g > 0, f / np.where(g > 0, g, 1.0), np.where(f > 0, np.inf, 0.0))
    return r


# -- closed forms -------------------------------------------------------------


def logistic_tails(t, alpha):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        lt = np.log(t)
    big = np.logaddexp(0.0, alpha * lt)
    inf = np.isinf(t)
    with np.errstate(invalid="ignore"):
        f_tail = np.exp(-(1.0 - 1.0 / alpha) * big)
        g_head = np.where(inf, 1.0, np.exp((alpha - 1.0) * (lt - big / alpha)))
    return f_tail, g_head


def logistic_log_f_tail(t, alpha):
    with np.errstate(divide="ignore"):
        lt = np.log(np.asarray(t, dtype=float))
    return -(1.0 - 1.0 / alpha) * np.logaddexp(0.0, alpha * lt)


def logistic_log_g_head(t, alpha):
    with np.errstate(divide="ignore"):
        lt = np.log(np.asarray(t, dtype=float))
    with np.errstate(invalid="ignore"):
        out = (alpha - 1.0) * (lt - np.logaddexp(0.0, alpha * lt) / alpha)
    return np.where(np.isposinf(lt), 0.0, out)


def uniform_tails(t, k):
    t = np.asarray(t, dtype=float)
    p = 1.0 / (1.0 + t)
    with np.errstate(invalid="ignore"):
        q = np.where(np.isinf(t), 1.0, t / (1.0 + t))
    return k * p * (1.0 + q), k * q * (1.0 + p)


def uniform_log_f_tail(t, k):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(k) - np.log1p(t) + np.log1p(t / (1.0 + t))


def uniform_log_g_head(t, k):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(k) + np.log(t) - np.log1p(t) + np.log1p(1.0 / (1.0 + t))
    return np.where(np.isinf(t), math.log(k), out)


def _exp_ratio_f_tail(t, c):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        w = 1.0 / t
        upper = c * (t + 2.0) * np.exp(-t)
        lower = c * (_E1_AT_1 + 4.0 / math.e - special.exp1(w) - np.exp(-w))
        out = np.where(t >= 1.0, upper, lower)
    return np.where(np.isinf(t), 0.0, out)


def exp_ratio_tails(t, c):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        return _exp_ratio_f_tail(t, c), _exp_ratio_f_tail(1.0 / t, c)


def exp_ratio_log_f_tail(t, c):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(
            t >= 1.0,
            math.log(c) + np.log(t + 2.0) - t,
            np.log(_exp_ratio_f_tail(t, c)),
        )


def exp_ratio_h1(s, c=1.0):
    """Right half of the light-ratio-tail density (``s`` in [1/2, 1))."""
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out = c / (2.0 * s * (1.0 - s) ** 3) * np.exp(-s / (1.0 - s))
    return np.where(s < 1.0, out, 0.0)


# -- model types --------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    """Point mass of ``mu`` at ``s`` carrying spectral values ``f(s)``, ``g(s)``."""

    s: float
    f: float
    g: float
    mass: float

    @property
    def ratio(self) -> float:
        return float(_ratio(self.f, self.g))

    @property
    def f_weight(self) -> float:
        return self.f * self.mass

    @property
    def g_weight(self) -> float:
        return self.g * self.mass


@dataclass(frozen=True, eq=False)
class Density:
    """Absolutely continuous part of ``mu`` on (0, 1).

    ``h``, ``f`` and ``g`` are vectorised callables.  ``tails`` (and
    optionally ``log_f_tail`` and ``log_g_head``) are closed forms in the threshold ``t``; when
    absent every quantity is obtained by quadrature.
    """

    h: Callable
    f: Callable
    g: Callable
    breakpoints: tuple = ()
    tails: Optional[Callable] = None
    log_f_tail: Optional[Callable] = None
    log_g_head: Optional[Callable] = None
    ratio_range: tuple = (0.0, math.inf)
    family: int = FAMILY_NONE
    family_param: float = 0.0

    def ratio(self, s):
        return _ratio(self.f(s), self.g(s))

    def threshold(self, t: float) -> float:
        """``sup {s : f(s)/g(s) <= t}``, by bisection to floating resolution."""
        lo, hi = 0.0, 1.0
        for _ in range(2000):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if self.ratio(mid) <= t:
                lo = mid
            else:
                hi = mid
        return lo

    def integrate(self, fn: Callable, a: float, b: float) -> float:
        """Integral of ``fn(s) * h(s)`` over ``(a, b)``."""
        if b <= a:
            return 0.0
        pts = [p for p in self.breakpoints if a < p < b]
        if pts:
            edges = [a, *pts, b]
            return sum(self.integrate(fn, lo, hi) for lo, hi in zip(edges[:-1], edges[1:]))

        def plain(s):
            return float(fn(s) * self.h(s))

        width = b - a

        def smoothed(v):
            # s = a + w (10v^3 - 15v^4 + 6v^5): ds ~ v^2 (1-v)^2 at the ends,
            # which tames integrable endpoint singularities
            s = a + width * v**3 * (10.0 - 15.0 * v + 6.0 * v * v)
            if not a < s < b:
                return 0.0
            return float(fn(s) * self.h(s)) * 30.0 * width * (v * (1.0 - v)) ** 2

        # quad flags roundoff when the integrand is quantised by the float
        # grid of s (e.g. singular ends within 1e-9 of 1); such a result is
        # kept only if its own error estimate is below QUAD_FALLBACK_ABS
        best, failure = None, None
        for integrand, lo, hi in ((plain, a, b), (smoothed, 0.0, 1.0)):
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", integrate.IntegrationWarning)
                val, err = integrate.quad(integrand, lo, hi, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=500)
            issues = [w for w in caught if issubclass(w.category, integrate.IntegrationWarning)]
            if not issues and math.isfinite(val):
                return val
            failure = issues[0].message if issues else "non-finite value"
            if math.isfinite(val) and (best is None or err < best[1]):
                best = (val, err)
        if best is not None and best[1] <= QUAD_FALLBACK_ABS:
            return best[0]
        raise QuadratureError(f"quadrature on ({a}, {b}) failed: {failure}")

    def swapped(self) -> "Density":
        h, f, g = self.h, self.f, self.g
        tails, lo_hi = self.tails, self.ratio_range
        log_f, log_g = self.log_f_tail, self.log_g_head

        def _at_inverse(fn):
            if fn is None:
                return None

            def wrapped(t):
                with np.errstate(divide="ignore"):
                    return fn(1.0 / np.asarray(t, dtype=float))

            return wrapped

        swapped_tails = None
        if tails is not None:

            def swapped_tails(t):
                t = np.asarray(t, dtype=float)
                with np.errstate(divide="ignore"):
                    inv = 1.0 / t
                f_tail, g_head = tails(inv)
                # E'_t = {g/f > t} = {f/g < 1/t}; the boundary is Lebesgue-null
                return g_head, f_tail

        rng = (1.0 / lo_hi[1], math.inf if lo_hi[0] == 0 else 1.0 / lo_hi[0])
        return Density(
            h=lambda s: h(1.0 - np.asarray(s)),
            f=lambda s: g(1.0 - np.asarray(s)),
            g=lambda s: f(1.0 - np.asarray(s)),
            breakpoints=tuple(sorted(1.0 - p for p in self.breakpoints)),
            tails=swapped_tails,
            log_f_tail=_at_inverse(log_g),
            log_g_head=_at_inverse(log_f),
            ratio_range=rng,
        )


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """Standard bivariate 1-Fréchet law given by atoms plus a density.

    Use the ``make_*`` constructors or :func:`custom`; they validate
    standardisation and ratio monotonicity.  Instances are immutable.
    """

    atoms: tuple
    density: Optional[Density] = None
    form: str = "custom"
    params: dict = field(default_factory=dict)
    swapped: bool = False
    source: Optional["SpectralModel"] = field(default=None, repr=False)

    ratio_order = True

    @cached_property
    def atom_arrays(self):
        """``(ratio, f*mass, g*mass)`` arrays, ordered by location."""
        r = np.array([a.ratio for a in self.atoms], dtype=float)
        fw = np.array([a.f_weight for a in self.atoms], dtype=float)
        gw = np.array([a.g_weight for a in self.atoms], dtype=float)
        return r, fw, gw

    @property
    def is_discrete(self) -> bool:
        return self.density is None

    @property
    def has_closed_form(self) -> bool:
        return self.density is None or self.density.tails is not None

    @property
    def form_tag(self) -> str:
        if not self.params:
            return self.form
        inner = ",".join(f"{k}={v}" for k, v in self.params.items() if k in ("alpha", "k", "rho"))
        return f"{self.form}({inner})" if inner else self.form

    @cached_property
    def mirror(self) -> "SpectralModel":
        return swap(self)

    def ratio_unbounded(self) -> bool:
        """Whether ``mu(E_t) > 0`` for every ``t``."""
        r, fw, _ = self.atom_arrays
        if np.any(np.isinf(r) & (fw > 0)):
            return True
        return self.density is not None and math.isinf(self.density.ratio_range[1])

    def totals(self) -> tuple:
        """``(integral f dmu, integral g dmu)``; densities by quadrature."""
        _, fw, gw = self.atom_arrays
        ft, gt = float(fw.sum()), float(gw.sum())
        if self.density is not None:
            d = self.density
            ft += d.integrate(d.f, 0.0, 1.0)
            gt += d.integrate(d.g, 0.0, 1.0)
        return ft, gt

    def to_spec(self) -> dict:
        if self.form == "custom":
            raise ModelError("custom models have no JSON form")
        out = {"form": self.form}
        if self.form == "discrete":
            out["a"] = list(self.params["a"])
            out["b"] = list(self.params["b"])
        else:
            out.update({k: v for k, v in self.params.items() if k in ("alpha", "k", "rho")})
        if self.swapped:
            out["swap"] = True
        return out

    def __repr__(self) -> str:
        tag = self.form_tag + (", swapped" if self.swapped else "")
        return f"SpectralModel({tag}, atoms={len(self.atoms)}, density={self.density is not None})"


# -- validation ---------------------------------------------------------------


def check_ratio_order(model: SpectralModel, grid: int = 1000, rtol: float = 1e-12) -> bool:
    """Check that ``f/g`` is nondecreasing over atoms and a density grid."""
    pts = [(a.s, a.ratio) for a in model.atoms]
    if model.density is not None:
        s = (np.arange(grid) + 0.5) / grid
        r = model.density.ratio(s)
        if np.any(np.isnan(r)):
            return False
        pts.extend(zip(s.tolist(), r.tolist()))
    pts.sort(key=lambda p: p[0])
    prev = -math.inf
    for _, r in pts:
        if r < prev and not math.isclose(r, prev, rel_tol=rtol):
            return False
        prev = max(prev, r)
    return True


def _validate(model: SpectralModel, tol: float = 1e-8) -> SpectralModel:
    for a in model.atoms:
        vals = (a.s, a.f, a.g, a.mass)
        if not all(math.isfinite(v) for v in vals):
            raise ModelError(f"non-finite atom {a}")
        if not 0.0 <= a.s <= 1.0:
            raise ModelError(f"atom location {a.s} outside [0, 1]")
        if a.f < 0 or a.g < 0:
            raise ModelError("spectral functions must be nonnegative")
        if a.mass <= 0:
            raise ModelError("atom masses must be positive")
        if a.f == 0 and a.g == 0:
            raise ModelError("atom with f = g = 0 carries no mass")
    if not model.atoms and model.density is None:
        raise ModelError("empty spectral measure")
    ft, gt = model.totals()
    if abs(ft - 1.0) > tol or abs(gt - 1.0) > tol:
        raise ModelError(f"model is not standard: integral f = {ft!r}, integral g = {gt!r}")
    if not check_ratio_order(model):
        raise ModelError("f/g must be nondecreasing on [0, 1]")
    return model


def custom(atoms: Sequence = (), density: Optional[Density] = None) -> SpectralModel:
    """Validated model from raw atoms (``Atom`` or 4-tuples) and a density."""
    atoms = tuple(a if isinstance(a, Atom) else Atom(*map(float, a)) for a in atoms)
    atoms = tuple(sorted(atoms, key=lambda a: a.s))
    return _validate(SpectralModel(atoms=atoms, density=density))


# -- the zoo ------------------------------------------------------------------


def _standard_atoms(weights):
    """Standard-form atoms (f = 2s, g = 2(1-s)) from ``{s: mass}``, dropping nulls."""
    return tuple(Atom(s, 2.0 * s, 2.0 * (1.0 - s), m) for s, m in sorted(weights.items()) if m > 0)


def make_independent() -> SpectralModel:
    return _validate(SpectralModel(atoms=_standard_atoms({0.0: 0.5, 1.0: 0.5}), form="independent"))


def make_rho(rho: float) -> SpectralModel:
    """Two boundary atoms of mass rho/2 and a central one of mass 1 - rho."""
    rho = float(rho)
    if not 0.0 <= rho <= 1.0:
        raise ModelError(f"rho must lie in [0, 1], got {rho}")
    atoms = _standard_atoms({0.0: rho / 2, 0.5: 1.0 - rho, 1.0: rho / 2})
    return _validate(SpectralModel(atoms=atoms, form="rho", params={"rho": rho}))


def make_logistic(alpha: float) -> SpectralModel:
    """Symmetric logistic law ``exp(-(x^-a + y^-a)^(1/a))``, ``1 < a < inf``."""
    alpha = float(alpha)
    if not (math.isfinite(alpha) and alpha > 1.0):
        raise ModelError(f"logistic alpha must be finite and > 1, got {alpha}")
    a = alpha

    def f(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            # 1 - s^a as -expm1(a log s) stays positive for s just below 1
            return (a - 1.0) * s ** (a - 1.0) * (-np.expm1(a * np.log(s))) ** (-1.0 / a)

    def g(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            return (a - 1.0) * s ** (a - 2.0)

    density = Density(
        h=lambda s: np.ones_like(np.asarray(s, dtype=float)),
        f=f,
        g=g,
        tails=lambda t: logistic_tails(t, a),
        log_f_tail=lambda t: logistic_log_f_tail(t, a),
        log_g_head=lambda t: logistic_log_g_head(t, a),
        family=FAMILY_LOGISTIC,
        family_param=a,
    )
    return _validate(SpectralModel(atoms=(), density=density, form="logistic", params={"alpha": alpha}))


def _uniform_density(k: float) -> Density:
    return Density(
        h=lambda s: k * np.ones_like(np.asarray(s, dtype=float)),
        f=lambda s: 2.0 * np.asarray(s, dtype=float),
        g=lambda s: 2.0 * (1.0 - np.asarray(s, dtype=float)),
        tails=lambda t: uniform_tails(t, k),
        log_f_tail=lambda t: uniform_log_f_tail(t, k),
        log_g_head=lambda t: uniform_log_g_head(t, k),
        family=FAMILY_UNIFORM,
        family_param=k,
    )


def make_mixed(k: float) -> SpectralModel:
    """Mixed model: Lebesgue weight ``k`` plus boundary atoms of mass (1-k)/2."""
    k = float(k)
    if not 0.0 <= k <= 1.0:
        raise ModelError(f"k must lie in [0, 1], got {k}")
    atoms = _standard_atoms({0.0: (1.0 - k) / 2, 1.0: (1.0 - k) / 2})
    density = _uniform_density(k) if k > 0 else None
    return _validate(SpectralModel(atoms=atoms, density=density, form="mixed", params={"k": k}))


def exp_ratio_constant() -> float:
    """Normalising constant of the light-ratio-tail density, by quadrature."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            half, _ = integrate.quad(lambda s: float(exp_ratio_h1(s)), 0.5, 1.0, epsabs=1e-13, epsrel=1e-12, limit=500)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"calibration failed: {exc}") from exc
    return 1.0 / (2.0 * half)


def make_exp_ratio() -> SpectralModel:
    """Symmetric standard-form density whose ratio tail decays like ``exp(-t)``."""
    c = exp_ratio_constant()

    def h(s):
        s = np.asarray(s, dtype=float)
        return np.where(s >= 0.5, exp_ratio_h1(np.maximum(s, 0.5), c), exp_ratio_h1(np.maximum(1.0 - s, 0.5), c))

    density = Density(
        h=h,
        f=lambda s: 2.0 * np.asarray(s, dtype=float),
        g=lambda s: 2.0 * (1.0 - np.asarray(s, dtype=float)),
        breakpoints=(0.5,),
        tails=lambda t: exp_ratio_tails(t, c),
        log_f_tail=lambda t: exp_ratio_log_f_tail(t, c),
        log_g_head=lambda t: exp_ratio_log_f_tail(1.0 / np.asarray(t, dtype=float), c),
        family=FAMILY_EXP_RATIO,
        family_param=c,
    )
    return _validate(SpectralModel(atoms=(), density=density, form="exp_ratio", params={"C": c}))


def make_discrete(a: Sequence[float], b: Sequence[float]) -> SpectralModel:
    """Spectrally discrete model ``(max a_i Z_i, max b_i Z_i)``.

    Both weight vectors are rescaled to sum to one; the scales are kept in
    ``params``.  Zero pairs are dropped; tied ratios are rejected.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 1 or a.shape != b.shape or a.size == 0:
        raise ModelError("a and b must be nonempty vectors of equal length")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ModelError("weights must be finite")
    if np.any(a < 0) or np.any(b < 0):
        raise ModelError("weights must be nonnegative")
    sa, sb = float(a.sum()), float(b.sum())
    if sa == 0 or sb == 0:
        raise ModelError("all-zero weight vector")
    keep = (a > 0) | (b > 0)
    a, b = a[keep] / sa, b[keep] / sb
    r = _ratio(a, b)
    order = np.argsort(r, kind="stable")
    a, b, r = a[order], b[order], r[order]
    if np.any(np.diff(r) == 0) or (r.size > 1 and np.sum(np.isinf(r)) > 1):
        raise ModelError("tied ratios a_i/b_i; merge the atoms first")
    m = a.size
    locs = np.linspace(0.0, 1.0, m) if m > 1 else np.array([0.5])
    atoms = tuple(Atom(float(s), float(ai), float(bi), 1.0) for s, ai, bi in zip(locs, a, b))
    params = {"a": a.tolist(), "b": b.tolist(), "scale_a": sa, "scale_b": sb}
    return _validate(SpectralModel(atoms=atoms, form="discrete", params=params))


def swap(model: SpectralModel) -> SpectralModel:
    """Exchange the roles of X and Y (reflect ``s -> 1 - s``).

    ``swap(swap(m))`` returns ``m`` itself.
    """
    if model.source is not None:
        return model.source
    atoms = tuple(sorted((Atom(1.0 - a.s, a.g, a.f, a.mass) for a in model.atoms), key=lambda a: a.s))
    density = model.density.swapped() if model.density is not None else None
    params = dict(model.params)
    swapped = not model.swapped
    if model.form == "discrete":
        params["a"], params["b"] = params["b"], params["a"]
        params["scale_a"], params["scale_b"] = params["scale_b"], params["scale_a"]
        swapped = False
    return SpectralModel(
        atoms=atoms, density=density, form=model.form, params=params, swapped=swapped, source=model
    )


def equivalent(m1: SpectralModel, m2: SpectralModel, tol: float = 1e-12, grid: int = 257) -> bool:
    """Same atom weights and the same density products ``f h``, ``g h`` on a grid."""
    r1, f1, g1 = m1.atom_arrays
    r2, f2, g2 = m2.atom_arrays
    if f1.shape != f2.shape:
        return False
    if not (np.allclose(f1, f2, rtol=0, atol=tol) and np.allclose(g1, g2, rtol=0, atol=tol)):
        return False
    if (m1.density is None) != (m2.density is None):
        return False
    if m1.density is None:
        return True
    s = (np.arange(grid) + 0.5) / grid
    d1, d2 = m1.density, m2.density
    with np.errstate(all="ignore"):
        ok_f = np.allclose(d1.f(s) * d1.h(s), d2.f(s) * d2.h(s), rtol=1e-9, atol=tol)
        ok_g = np.allclose(d1.g(s) * d1.h(s), d2.g(s) * d2.h(s), rtol=1e-9, atol=tol)
    return bool(ok_f and ok_g)


_CONSTRUCTORS = {
    "independent": (make_independent, ()),
    "rho": (make_rho, ("rho",)),
    "logistic": (make_logistic, ("alpha",)),
    "mixed": (make_mixed, ("k",)),
    "exp_ratio": (make_exp_ratio, ()),
    "discrete": (make_discrete, ("a", "b")),
}


def from_spec(spec: dict) -> SpectralModel:
    """Build a model from its JSON form, e.g. ``{"form": "logistic", "alpha": 2}``."""
    if not isinstance(spec, dict) or "form" not in spec:
        raise ModelError("model spec must be an object with a 'form' key")
    form = spec["form"]
    if form not in _CONSTRUCTORS:
        raise ModelError(f"unknown form {form!r}; expected one of {sorted(_CONSTRUCTORS)}")
    ctor, keys = _CONSTRUCTORS[form]
    extra = set(spec) - set(keys) - {"form", "swap"}
    if extra:
        raise ModelError(f"unexpected keys for {form}: {sorted(extra)}")
    try:
        model = ctor(*(spec[k] for k in keys))
    except KeyError as exc:
        raise ModelError(f"missing parameter {exc.args[0]!r} for {form}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(f"bad parameter for {form}: {exc}") from None
    return swap(model) if spec.get("swap") else model
