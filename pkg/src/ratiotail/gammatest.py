"""Quotient correlation coefficients and the gamma independence test.

With ``R+ = max X(u)/Y(u)`` and ``R- = max Y(u)/X(u)`` over a sample of
size ``n``, the original coefficient is ``(R+ + R- - 2) / (R+ R- - 1)`` and
the modified one is ``1/R+ + 1/R-``.  Under independence ``n q`` converges
to ``Gamma(2, theta)`` with ``theta = 1 / (1 - exp(-1/u))`` for both.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaincc, gammainccinv, gammaincinv

from .dist import norming, ratio_tail_index
from .errors import DegenerateStatisticError, ModelError
from .sampler import derive_seed, sample_batch, sample_frechet, threshold_ratios
from .spectral import SpectralModel

VARIANTS = ("original", "modified")


def _ratio_maxima(pairs, u: float) -> tuple[float, float]:
    pairs = np.asarray(pairs, dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] < 1:
        raise ModelError("pairs must be an (n, 2) array with n >= 1")
    if not np.all(np.isfinite(pairs)) or not np.all(pairs > 0):
        raise ModelError("pairs must be positive and finite")
    r = threshold_ratios(pairs, u)
    return float(r.max()), float((1.0 / r).max())


def quotient_coefficient(pairs, u: float = 0.0) -> float:
    """Original coefficient ``(R+ + R- - 2) / (R+ R- - 1)``.

    Raises
    ------
    DegenerateStatisticError
        When ``R+ R- = 1``, i.e. every thresholded ratio is the same.
    """
    rp, rm = _ratio_maxima(pairs, u)
    den = rp * rm - 1.0
    if den <= 0.0:
        raise DegenerateStatisticError(f"quotient coefficient is 0/0 (R+={rp!r}, R-={rm!r})")
    return (rp + rm - 2.0) / den


def modified_quotient(pairs, u: float = 0.0) -> float:
    """Modified coefficient ``1/R+ + 1/R- = (R+ + R-) / (R+ R-)``; always finite."""
    rp, rm = _ratio_maxima(pairs, u)
    return 1.0 / rp + 1.0 / rm


def null_theta(u: float) -> float:
    """Scale of the ``Gamma(2, theta)`` null law at threshold ``u``."""
    if not u >= 0:
        raise ModelError(f"u must be >= 0, got {u}")
    if u == 0:
        return 1.0
    return 1.0 / -math.expm1(-1.0 / u)


# -- Gamma(2, theta) ----------------------------------------------------------


def _check_theta(theta: float) -> float:
    if not (theta > 0 and math.isfinite(theta)):
        raise ModelError(f"theta must be positive and finite, got {theta}")
    return float(theta)


def _check_x(x: float) -> float:
    if not x >= 0:
        raise ModelError(f"x must be >= 0, got {x}")
    return float(x)


def gamma_sf(x: float, theta: float = 1.0) -> float:
    """``P(G > x) = exp(-z) (1 + z)`` with ``z = x / theta``."""
    theta, x = _check_theta(theta), _check_x(x)
    return float(gammaincc(2.0, x / theta))


def gamma_cdf(x: float, theta: float = 1.0) -> float:
    """CDF ``1 - exp(-z) (1 + z)`` of the gamma law with shape 2 and scale ``theta``.

    Evaluated as a regularized incomplete gamma function, which keeps full
    relative accuracy near 0 where the closed form cancels.
    """
    theta, x = _check_theta(theta), _check_x(x)
    return float(gammainc(2.0, x / theta))


def gamma_quantile(p: float, theta: float = 1.0) -> float:
    """Inverse of :func:`gamma_cdf`.

    Upper quantiles invert the survival function, which stays well
    conditioned where the CDF flattens out.
    """
    theta = _check_theta(theta)
    if not 0 < p < 1:
        raise ModelError(f"p must lie in (0, 1), got {p}")
    z = gammaincinv(2.0, p) if p <= 0.5 else gammainccinv(2.0, 1.0 - p)
    return theta * float(z)


# -- the test -----------------------------------------------------------------


@dataclass(frozen=True)
class GammaTestReport:
    statistic: float
    variant: str
    u: float
    null_theta: float
    p_value: float
    reject: bool
    level: float
    n: int
    critical_value: float

    def as_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "variant": self.variant,
            "u": self.u,
            "null_theta": self.null_theta,
            "p_value": self.p_value,
            "reject": self.reject,
            "level": self.level,
            "n": self.n,
            "critical_value": self.critical_value,
        }


def gamma_test(pairs, level: float = 0.05, u: float = 0.0, variant: str = "modified") -> GammaTestReport:
    """Test independence of ``X`` and ``Y`` from the statistic ``n q``.

    The p-value is ``P(G > n q)`` for ``G ~ Gamma(2, theta)``; the test
    rejects when it falls below ``level``.
    """
    if variant not in VARIANTS:
        raise ModelError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if not 0 < level < 1:
        raise ModelError(f"level must lie in (0, 1), got {level}")
    pairs = np.asarray(pairs, dtype=float)
    n = pairs.shape[0] if pairs.ndim == 2 else 0
    if n < 2:
        raise ModelError("gamma test needs n >= 2 pairs")
    theta = null_theta(u)
    q = quotient_coefficient(pairs, u) if variant == "original" else modified_quotient(pairs, u)
    stat = n * q
    p = gamma_sf(stat, theta)
    return GammaTestReport(
        statistic=stat,
        variant=variant,
        u=float(u),
        null_theta=theta,
        p_value=p,
        reject=p < level,
        level=float(level),
        n=n,
        critical_value=gamma_quantile(1.0 - level, theta),
    )


def rejection_rate(
    model: SpectralModel,
    n: int,
    reps: int,
    level: float = 0.05,
    u: float = 0.0,
    variant: str = "modified",
    seed: int = 0,
) -> float:
    """Fraction of ``reps`` seeded batches on which :func:`gamma_test` rejects."""
    hits = 0
    for r in range(reps):
        pairs = sample_batch(model, n, seed, key=(r,)).pairs
        hits += gamma_test(pairs, level, u, variant).reject
    return hits / reps


def limit_power(rho: float, level: float = 0.05) -> float:
    """Large-sample power against the rho-model: ``P(G > rho q)`` with ``q`` the null critical value."""
    if not 0 < rho <= 1:
        raise ModelError(f"rho must lie in (0, 1], got {rho}")
    return gamma_sf(rho * gamma_quantile(1.0 - level, 1.0), 1.0)


@dataclass(frozen=True)
class PowerCurve:
    rho: np.ndarray
    empirical_power: np.ndarray
    limit_power: np.ndarray
    reps: int
    n: int
    level: float
    seed: int

    def rows(self):
        for r, e, lp in zip(self.rho, self.empirical_power, self.limit_power):
            yield float(r), float(e), float(lp), self.reps


def _rho_stats(z: np.ndarray, rhos: np.ndarray) -> np.ndarray:
    # X = rho Z3 v (1-rho) Z2, Y = rho Z1 v (1-rho) Z2; one row per rho
    rhos = rhos[:, None]
    x = np.maximum(rhos * z[:, 2], (1.0 - rhos) * z[:, 1])
    y = np.maximum(rhos * z[:, 0], (1.0 - rhos) * z[:, 1])
    r = x / y
    return z.shape[0] * (1.0 / r.max(axis=1) + 1.0 / (1.0 / r).max(axis=1))


def power_simulation(
    rho_grid,
    n: int = 20,
    reps: int = 1000,
    level: float = 0.05,
    seed: int = 0,
    workers: int = 1,
) -> PowerCurve:
    """Empirical power of the modified gamma test against ``make_rho(rho)``.

    Replicate ``r`` draws three Fréchet columns from stream ``(seed, r)``;
    every ``rho`` reuses them (common random numbers), built through the
    max-construction of the rho-model.
    """
    rhos = np.asarray(rho_grid, dtype=float).ravel()
    if rhos.size == 0 or np.any(~(rhos > 0)) or np.any(rhos > 1):
        raise ModelError("rho grid values must lie in (0, 1]")
    if int(reps) != reps or reps < 1:
        raise ModelError("reps must be a positive integer")
    if int(n) != n or n < 2:
        raise ModelError("n must be an integer >= 2")

    def one(r):
        rng = np.random.Generator(np.random.PCG64(derive_seed(seed, r)))
        z = sample_frechet(rng, (int(n), 3))
        return np.array([gamma_sf(s, 1.0) < level for s in _rho_stats(z, rhos)])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = list(pool.map(one, range(int(reps))))
    else:
        hits = [one(r) for r in range(int(reps))]
    emp = np.mean(hits, axis=0)
    lim = np.array([limit_power(r, level) for r in rhos])
    return PowerCurve(rhos, emp, lim, int(reps), int(n), float(level), int(seed))


# -- scaled ratio maxima ------------------------------------------------------


@dataclass(frozen=True)
class MaximaCheck:
    deviation: float
    alpha_plus: float
    alpha_minus: float
    kappa_plus: float
    kappa_minus: float
    grid: tuple

    def as_dict(self) -> dict:
        return {
            "deviation": self.deviation,
            "alpha_plus": self.alpha_plus,
            "alpha_minus": self.alpha_minus,
            "kappa_plus": self.kappa_plus,
            "kappa_minus": self.kappa_minus,
            "grid": list(self.grid),
        }


def joint_maxima_independence_check(
    model: SpectralModel,
    n: int,
    reps: int,
    seed: int = 0,
    grid=(0.5, 1.0, 2.0),
    alpha: tuple | None = None,
    workers: int = 1,
) -> MaximaCheck:
    """Max deviation of the joint CDF of ``(R+/kappa+, R-/kappa-)`` from a product of Fréchet laws.

    ``kappa`` come from :func:`norming`; the Fréchet indices default to the
    numerical ratio tail indices of each side.
    """
    if int(reps) != reps or reps < 1:
        raise ModelError("reps must be a positive integer")
    kp, km = norming(model, "plus", n), norming(model, "minus", n)
    if alpha is None:
        ap, am = ratio_tail_index(model, "plus"), ratio_tail_index(model, "minus")
    else:
        ap, am = map(float, alpha)

    def one(r):
        ratios = sample_batch(model, n, seed, key=(r,)).ratios(0.0)
        return ratios.max() / kp, (1.0 / ratios).max() / km

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            m = np.array(list(pool.map(one, range(int(reps)))))
    else:
        m = np.array([one(r) for r in range(int(reps))])
    dev = 0.0
    for s in grid:
        for t in grid:
            emp = np.mean((m[:, 0] <= s) & (m[:, 1] <= t))
            ref = math.exp(-(s**-ap) - t**-am)
            dev = max(dev, abs(emp - ref))
    return MaximaCheck(float(dev), ap, am, kp, km, tuple(float(g) for g in grid))
