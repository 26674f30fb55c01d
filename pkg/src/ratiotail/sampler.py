"""Exact i.i.d. sampling from spectral models.

Atom-only models use the max-construction ``(max a_i Z_i, max b_i Z_i)``
with ``Z_i`` i.i.d. standard 1-Fréchet.  Models with a density draw
``Y ~ Phi_1`` and then ``X`` by numerical inversion of ``P(X <= x | Y = y)``.

Seeded batches are split into fixed-size blocks, each with its own stream
``SeedSequence(seed, spawn_key=(*key, block))``; output therefore does not
depend on how many workers generate it.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels_py, kernels
from .dist import norms
from .errors import ModelError, SamplingError
from .spectral import FAMILY_NONE, SpectralModel

BLOCK = 8192
_TWO52 = float(2**52)


def uniform_open(rng: np.random.Generator, size=None) -> np.ndarray:
    """Uniforms ``(k + 1/2) / 2^52`` on the open interval (0, 1).

    Every value, including the extremes ``2^-53`` and ``1 - 2^-53``, is
    exactly representable, so neither 0 nor 1 can occur.
    """
    return (rng.integers(0, 2**52, size=size).astype(float) + 0.5) / _TWO52


def sample_frechet(rng: np.random.Generator, size=None):
    """Standard 1-Fréchet draws ``-1 / log(U)``."""
    z = -1.0 / np.log(uniform_open(rng, size))
    return float(z) if size is None else z


def _check_n(n) -> int:
    if int(n) != n or n < 1:
        raise ModelError(f"n must be a positive integer, got {n}")
    return int(n)


def _invert(model: SpectralModel, y: np.ndarray, u: np.ndarray) -> np.ndarray:
    d = model.density
    r, fw, gw = model.atom_arrays
    if d.family != FAMILY_NONE:
        x = kernels.conditional_quantile(d.family, d.family_param, r, fw, gw, y, u)
    else:
        if model.has_closed_form:

            def norms_fn(t):
                n = norms(model, t, "closed")
                return n.f_E, n.g_D

        else:

            def norms_fn(t):
                vals = [norms(model, float(ti), "quad") for ti in t]
                return np.array([v.f_E for v in vals]), np.array([v.g_D for v in vals])

        x = _kernels_py.invert_conditional(norms_fn, y, u)
    bad = ~np.isfinite(x)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise SamplingError(f"conditional inversion failed for {model!r} at y={y[i]!r}, target={u[i]!r}")
    return x


def _max_construction(z: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rows ``(max a_i z_i, max b_i z_i)``, kept inside the ratio support.

    The ratio ``x/y`` of such a pair lies in ``[min a_i/b_i, max a_i/b_i]``.
    Rounding in ``a_i z_i`` and in the division can push the computed
    ``x / y`` one ulp outside; ``x`` is then nudged by one ulp so the
    bound holds exactly in floating point.
    """
    x, y = (z * a).max(axis=1), (z * b).max(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = a / b
    lo, hi = r.min(), r.max()
    for _ in range(4):
        q = x / y
        over, under = q > hi, q < lo
        if not (over.any() or under.any()):
            break
        x[over] = np.nextafter(x[over], 0.0)
        x[under] = np.nextafter(x[under], np.inf)
    return np.column_stack([x, y])


def sample_pairs(model: SpectralModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. pairs as an ``(n, 2)`` array drawn from one generator."""
    n = _check_n(n)
    if model.density is None:
        _, fw, gw = model.atom_arrays
        return _max_construction(sample_frechet(rng, (n, fw.size)), fw, gw)
    y = sample_frechet(rng, n)
    u = uniform_open(rng, n)
    return np.column_stack([_invert(model, y, u), y])


def sample_pair(model: SpectralModel, rng: np.random.Generator) -> tuple:
    x, y = sample_pairs(model, 1, rng)[0]
    return float(x), float(y)


def threshold_ratios(pairs: np.ndarray, u: float = 0.0) -> np.ndarray:
    """``X(u) / Y(u)`` with ``Z(u) = max(Z, u)``."""
    if not u >= 0:
        raise ModelError(f"u must be >= 0, got {u}")
    pairs = np.asarray(pairs, dtype=float)
    return np.maximum(pairs[:, 0], u) / np.maximum(pairs[:, 1], u)


def sample_ratios(model: SpectralModel, n: int, u: float, rng: np.random.Generator) -> np.ndarray:
    return threshold_ratios(sample_pairs(model, n, rng), u)


# -- seeded batches -----------------------------------------------------------


def derive_seed(seed, *key) -> np.random.SeedSequence:
    """Child stream of ``seed`` identified by the integer path ``key``."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(key))
    return np.random.SeedSequence(int(seed), spawn_key=tuple(key))


@dataclass
class SampleBatch:
    pairs: np.ndarray
    model_id: dict | str
    seed: int
    n: int
    u: float = 0.0
    key: tuple = field(default_factory=tuple)

    @property
    def x(self) -> np.ndarray:
        return self.pairs[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.pairs[:, 1]

    def ratios(self, u: float | None = None) -> np.ndarray:
        return threshold_ratios(self.pairs, self.u if u is None else u)


def sample_batch(
    model: SpectralModel,
    n: int,
    seed: int,
    *,
    key: tuple = (),
    u: float = 0.0,
    workers: int = 1,
) -> SampleBatch:
    """Reproducible batch: identical ``(model, seed, key, n)`` give identical pairs."""
    n = _check_n(n)
    blocks = [(b, min(BLOCK, n - b * BLOCK)) for b in range(math.ceil(n / BLOCK))]

    def run(block):
        b, size = block
        rng = np.random.Generator(np.random.PCG64(derive_seed(seed, *key, b)))
        return sample_pairs(model, size, rng)

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(blk) for blk in blocks]
    try:
        model_id = model.to_spec()
    except ModelError:
        model_id = repr(model)
    seed_id = seed.entropy if isinstance(seed, np.random.SeedSequence) else int(seed)
    return SampleBatch(np.concatenate(parts), model_id, seed_id, n, u, tuple(key))


# -- quantised oracle ---------------------------------------------------------


@lru_cache(maxsize=16)
def quantize(model: SpectralModel, m: int) -> tuple:
    """Atom weights ``(a, b)`` of an ``m``-cell quantisation of the density.

    Each cell of an equal partition of (0, 1) becomes one atom carrying the
    cell integrals of ``f h`` and ``g h``; original atoms are kept exactly.
    """
    if int(m) != m or m < 2:
        raise ModelError(f"m must be an integer >= 2, got {m}")
    _, fw, gw = model.atom_arrays
    a, b = [fw], [gw]
    d = model.density
    if d is not None:
        edges = np.linspace(0.0, 1.0, int(m) + 1)
        a.append(np.array([d.integrate(d.f, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]))
        b.append(np.array([d.integrate(d.g, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]))
    a, b = np.concatenate(a), np.concatenate(b)
    keep = (a > 0) | (b > 0)
    return a[keep], b[keep]


def sample_pairs_quantized(
    model: SpectralModel, n: int, m: int, rng: np.random.Generator, chunk: int = 512
) -> np.ndarray:
    """Approximate pairs from the quantised measure; a test oracle only."""
    n = _check_n(n)
    a, b = quantize(model, m)
    out = np.empty((n, 2))
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        out[start:stop] = _max_construction(sample_frechet(rng, (stop - start, a.size)), a, b)
    return out


def sample_pair_quantized(model: SpectralModel, m: int, rng: np.random.Generator) -> tuple:
    x, y = sample_pairs_quantized(model, 1, m, rng)[0]
    return float(x), float(y)
