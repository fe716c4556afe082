"""Polya-Gamma PG(1, c) random variates.

``sample_pg`` is an exact sampler: Devroye's alternating-series rejection
method as adapted to PG(1, c) by Polson, Scott & Windle (2013). A PG(1, c)
draw is J*(1, c/2) / 4; J* is proposed from a mixture of a truncated
inverse-Gaussian on (0, t] and an exponential tail on (t, inf) with
t = 0.64, then accepted by bracketing the target density with partial sums
of its series representation.

``pg_series_oracle`` draws from the defining infinite sum of weighted gamma
variables, truncated after ``n_terms`` terms. It is slow and slightly biased
(mean too small by O(1/n_terms)) and exists only to validate ``sample_pg``.
"""
from __future__ import annotations

import math

import numba
import numpy as np

TRUNC = 0.64
MAX_PROPOSALS = 10_000

_PI = math.pi
_LOG_HALF_PI = math.log(0.5 * math.pi)
_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@numba.njit(cache=True)
def _log_ndtr(x):
    if x > -20.0:
        return math.log(0.5 * math.erfc(-x / _SQRT2))
    # Mills-ratio asymptotics
    x2 = x * x
    return -0.5 * x2 - math.log(-x) - _LOG_SQRT_2PI + math.log1p(-1.0 / x2 + 3.0 / (x2 * x2))


@numba.njit(cache=True)
def _series_coef(n, x):
    """n-th term of the alternating series for the J*(1, 0) density at x."""
    k = (n + 0.5) * _PI
    if x > TRUNC:
        return k * math.exp(-0.5 * k * k * x)
    if x > 0.0:
        return math.exp(-1.5 * (_LOG_HALF_PI + math.log(x)) + math.log(k) - 2.0 * (n + 0.5) * (n + 0.5) / x)
    return 0.0


@numba.njit(cache=True)
def _exp_mass(z):
    """Probability that the proposal comes from the exponential tail."""
    t = TRUNC
    fz = 0.125 * _PI * _PI + 0.5 * z * z
    b = math.sqrt(1.0 / t) * (t * z - 1.0)
    a = -math.sqrt(1.0 / t) * (t * z + 1.0)
    x0 = math.log(fz) + fz * t
    xb = x0 - z + _log_ndtr(b)
    xa = x0 + z + _log_ndtr(a)
    q_over_p = 4.0 / _PI * (math.exp(xb) + math.exp(xa))
    return 1.0 / (1.0 + q_over_p)


@numba.njit(cache=True)
def _truncated_inv_gauss(z, gen):
    """Inverse-Gaussian(mean 1/z, shape 1) restricted to (0, TRUNC]."""
    t = TRUNC
    x = t + 1.0
    if z < 1.0 / t:
        # mean beyond the truncation point: chi-square proposal, exp(-z^2 x / 2) acceptance
        alpha = 0.0
        tries = 0
        while gen.random() > alpha:
            tries += 1
            if tries > MAX_PROPOSALS:
                raise RuntimeError("truncated inverse-Gaussian sampler exceeded proposal cap")
            e1 = gen.standard_exponential()
            e2 = gen.standard_exponential()
            while e1 * e1 > 2.0 * e2 / t:
                e1 = gen.standard_exponential()
                e2 = gen.standard_exponential()
            x = 1.0 + e1 * t
            x = t / (x * x)
            alpha = math.exp(-0.5 * z * z * x)
    else:
        mu = 1.0 / z
        tries = 0
        while x > t:
            tries += 1
            if tries > MAX_PROPOSALS:
                raise RuntimeError("truncated inverse-Gaussian sampler exceeded proposal cap")
            y = gen.standard_normal()
            y *= y
            half_mu = 0.5 * mu
            mu_y = mu * y
            x = mu + half_mu * mu_y - half_mu * math.sqrt(4.0 * mu_y + mu_y * mu_y)
            if gen.random() > mu / (mu + x):
                x = mu * mu / x
    return x


@numba.njit(cache=True)
def _draw_pg1(c, gen):
    z = 0.5 * abs(c)
    fz = 0.125 * _PI * _PI + 0.5 * z * z
    mass = _exp_mass(z)
    for _ in range(MAX_PROPOSALS):
        if gen.random() < mass:
            x = TRUNC + gen.standard_exponential() / fz
        else:
            x = _truncated_inv_gauss(z, gen)
        s = _series_coef(0, x)
        y = gen.random() * s
        n = 0
        while True:
            n += 1
            if n % 2 == 1:
                s -= _series_coef(n, x)
                if y <= s:
                    return 0.25 * x
            else:
                s += _series_coef(n, x)
                if y > s:
                    break
    raise RuntimeError("PG(1, c) sampler exceeded proposal cap")


@numba.njit(cache=True)
def _fill_pg1(c, gen, out):
    for i in range(c.shape[0]):
        out[i] = _draw_pg1(c[i], gen)


def sample_pg(c: float, rng: np.random.Generator) -> float:
    """One exact draw from PG(1, c)."""
    c = float(c)
    if not math.isfinite(c):
        raise ValueError(f"PG tilt must be finite, got {c}")
    return _draw_pg1(c, rng)


def sample_pg_many(c, rng: np.random.Generator) -> np.ndarray:
    """Independent PG(1, c_i) draws for every entry of ``c``."""
    c = np.ascontiguousarray(c, dtype=np.float64).ravel()
    if not np.all(np.isfinite(c)):
        raise ValueError("PG tilts must be finite")
    out = np.empty_like(c)
    _fill_pg1(c, rng, out)
    return out


def pg_series_oracle(c: float, n_terms: int, rng: np.random.Generator, size=None, gammas=None):
    """Truncated-series PG(1, c) draws: (1/2pi^2) sum_k G_k / ((k-1/2)^2 + c^2/4pi^2).

    ``gammas`` overrides the Gamma(1, 1) variables (shape ``(..., n_terms)``).
    """
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    k = np.arange(1, n_terms + 1)
    denom = (k - 0.5) ** 2 + c * c / (4.0 * _PI**2)
    if gammas is None:
        shape = (n_terms,) if size is None else (size, n_terms)
        gammas = rng.standard_gamma(1.0, size=shape)
    gammas = np.asarray(gammas, dtype=float)
    return (gammas / denom).sum(axis=-1) / (2.0 * _PI**2)


def pg_series_mean(c: float, n_terms: int = 10_000) -> float:
    """Mean of the ``n_terms`` truncated series."""
    k = np.arange(1, n_terms + 1)
    return float(np.sum(1.0 / ((k - 0.5) ** 2 + c * c / (4.0 * _PI**2))) / (2.0 * _PI**2))


def pg_mean(c: float) -> float:
    """Closed-form E[PG(1, c)] = tanh(c/2) / (2c)."""
    c = abs(float(c))
    if c < 1e-6:
        return 0.25 - c * c / 48.0
    return math.tanh(0.5 * c) / (2.0 * c)
