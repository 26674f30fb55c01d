"""Hill estimator and empirical tail dependence."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ModelError
from .sampler import sample_batch
from .spectral import SpectralModel


@dataclass(frozen=True)
class HillEstimate:
    gamma_hat: float
    k: int
    n: int
    se_approx: float

    def as_dict(self) -> dict:
        return {"gamma_hat": self.gamma_hat, "k": self.k, "n": self.n, "se_approx": self.se_approx}


def default_k(n: int) -> int:
    """``floor(n ** 0.3)``, clipped to ``[1, n - 1]``."""
    return max(1, min(n - 1, int(math.floor(n**0.3))))


def hill(data, k: int) -> HillEstimate:
    """Hill estimate of the reciprocal tail index from the top ``k`` values.

    Mean of ``log R_(i)`` over the ``k`` largest observations minus
    ``log`` of the ``(k+1)``-th largest.
    """
    x = np.asarray(data, dtype=float).ravel()
    n = x.size
    if int(k) != k or not 1 <= k <= n - 1:
        raise ModelError(f"k must be an integer in [1, n-1] = [1, {n - 1}], got {k}")
    if not np.all(x > 0) or not np.all(np.isfinite(x)):
        raise ModelError("Hill estimator needs positive finite data")
    k = int(k)
    top = np.sort(x, kind="stable")[n - k - 1 :]
    logs = np.log(top)
    g = float(logs[1:].mean() - logs[0])
    return HillEstimate(g, k, n, g / math.sqrt(k))


@dataclass(frozen=True)
class CLTSummary:
    mean: float
    var: float
    k: int
    n: int
    reps: int
    values: np.ndarray

    def within(self, mean_tol: float = 0.2, var_lo: float = 0.7, var_hi: float = 1.3) -> bool:
        return abs(self.mean) <= mean_tol and var_lo <= self.var <= var_hi


def hill_clt_check(
    model: SpectralModel,
    alpha: float,
    n: int,
    beta: float,
    reps: int,
    seed: int = 0,
    workers: int = 1,
) -> CLTSummary:
    """Simulate ``sqrt(k) (gamma_hat - 1/alpha) * alpha`` with ``k = floor(n^(beta/2))``.

    Replicate ``r`` draws its ratios from the stream ``(seed, r)``.
    """
    if not (math.isfinite(alpha) and alpha > 1):
        raise ModelError(f"alpha must be > 1, got {alpha}")
    if not 0 < beta < 2.0 / 3.0:
        raise ModelError(f"beta must lie in (0, 2/3), got {beta}")
    if int(reps) != reps or reps < 2:
        raise ModelError("reps must be an integer >= 2")
    k = int(math.floor(n ** (beta / 2.0)))
    if not 1 <= k < n:
        raise ModelError(f"k = floor(n^(beta/2)) = {k} is out of range for n = {n}")

    def one(r):
        ratios = sample_batch(model, n, seed, key=(r,)).ratios(0.0)
        return math.sqrt(k) * (hill(ratios, k).gamma_hat - 1.0 / alpha) * alpha

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vals = np.array(list(pool.map(one, range(reps))))
    else:
        vals = np.array([one(r) for r in range(reps)])
    return CLTSummary(float(vals.mean()), float(vals.var(ddof=1)), k, n, int(reps), vals)


def empirical_tail_dependence(pairs, t: float) -> float:
    """``#{x > t, y > t} / #{y > t}``."""
    pairs = np.asarray(pairs, dtype=float)
    above_y = pairs[:, 1] > t
    m = int(above_y.sum())
    if m == 0:
        raise ModelError(f"no y exceeds t = {t}")
    return float(np.count_nonzero(above_y & (pairs[:, 0] > t)) / m)
