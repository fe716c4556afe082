"""Posterior machinery for logistic regression on revealed labels.

* ``gibbs``: Polya-Gamma augmented Gibbs sampler for a Gaussian prior.
* ``fit_penalized_mle``: ridge-penalised logistic MLE by damped Newton/IRLS.
* ``project_to_ellipsoid``: nearest point of a Euclidean ball in a V^{-1} norm.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numba
import numpy as np
from scipy import linalg, optimize

from .core import log_sigmoid, sigmoid
from .pg import _fill_pg1, sample_pg_many

logger = logging.getLogger(__name__)

PgSampler = Callable[[np.ndarray, np.random.Generator], np.ndarray]


class GibbsError(RuntimeError):
    pass


class GaussianPrior:
    """MVN(b, B) prior; caches the precision B^{-1} and B^{-1} b."""

    def __init__(self, b, B):
        self.b = np.atleast_1d(np.asarray(b, dtype=float))
        self.B = np.atleast_2d(np.asarray(B, dtype=float))
        d = self.b.shape[0]
        if self.B.shape != (d, d):
            raise ValueError(f"prior covariance must be {d}x{d}, got {self.B.shape}")
        if not np.allclose(self.B, self.B.T):
            raise ValueError("prior covariance must be symmetric")
        try:
            chol = np.linalg.cholesky(self.B)
        except np.linalg.LinAlgError as exc:
            raise ValueError("prior covariance must be positive definite") from exc
        self._chol = chol
        self.precision = linalg.cho_solve((chol, True), np.eye(d))
        self.precision_mean = self.precision @ self.b

    @classmethod
    def isotropic(cls, d: int, scale: float = 1.0, mean: float = 0.0) -> "GaussianPrior":
        return cls(np.full(d, mean), scale * np.eye(d))

    @property
    def d(self) -> int:
        return self.b.shape[0]

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.b + self._chol @ rng.standard_normal(self.d)


class Dataset:
    """Revealed observations (x_s, C_s) from rounds where action 1 was played."""

    def __init__(self, d: int, capacity: int = 64):
        self.d = d
        self._X = np.empty((capacity, d))
        self._c = np.empty(capacity)
        self._n = 0

    def append(self, x, c: int) -> None:
        if c not in (0, 1):
            raise ValueError(f"class must be 0 or 1, got {c}")
        if self._n == self._X.shape[0]:
            self._X = np.concatenate([self._X, np.empty_like(self._X)])
            self._c = np.concatenate([self._c, np.empty_like(self._c)])
        self._X[self._n] = x
        self._c[self._n] = c
        self._n += 1

    @classmethod
    def from_arrays(cls, X, c) -> "Dataset":
        X = np.atleast_2d(np.asarray(X, dtype=float))
        ds = cls(X.shape[1], capacity=max(len(X), 1))
        for xi, ci in zip(X, c):
            ds.append(xi, int(ci))
        return ds

    @property
    def X(self) -> np.ndarray:
        return self._X[: self._n]

    @property
    def c(self) -> np.ndarray:
        return self._c[: self._n]

    def __len__(self) -> int:
        return self._n


def compute_kappa(c) -> np.ndarray:
    return np.asarray(c, dtype=float) - 0.5


def conditional_moments(prior: GaussianPrior, X, c, omega):
    """Mean and covariance of theta | omega, data: V = (X'ΩX + B^-1)^-1, m = V(X'κ + B^-1 b)."""
    X = np.asarray(X, dtype=float).reshape(-1, prior.d)
    precision = (X.T * omega) @ X + prior.precision
    chol = _cholesky(precision)
    mean = linalg.cho_solve((chol, True), X.T @ compute_kappa(c) + prior.precision_mean)
    cov = linalg.cho_solve((chol, True), np.eye(prior.d))
    return mean, cov


def _cholesky(precision: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(precision)
    except np.linalg.LinAlgError as exc:
        eig = np.linalg.eigvalsh(precision)
        raise GibbsError(
            f"conditional precision is not positive definite (eigenvalues {eig.min():.3g}..{eig.max():.3g})"
        ) from exc


def gibbs(
    prior: GaussianPrior,
    M: int,
    data: Dataset,
    theta_init,
    rng: np.random.Generator,
    *,
    pg_sampler: PgSampler = sample_pg_many,
    burn_in: int = 0,
    truncate: bool = False,
    radius: float = 1.0,
) -> np.ndarray:
    """Run ``burn_in + M`` Gibbs sweeps from ``theta_init``; return the last M draws as an (M, d) array.

    With ``truncate`` the Gaussian step is restricted to the ball of the given
    radius (rejection, 100 tries, then projection in the V^{-1} norm).
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    d = prior.d
    X, c = data.X, data.c
    xk = X.T @ compute_kappa(c) + prior.precision_mean
    theta = np.array(theta_init, dtype=float).reshape(d)
    draws = np.empty((M, d))
    if pg_sampler is sample_pg_many and not truncate:
        status = _gibbs_jit(np.ascontiguousarray(X), xk, prior.precision, theta, burn_in, rng, draws)
        if status != 0:
            raise GibbsError(f"conditional precision is not positive definite (sweep {status})")
        return draws
    for sweep in range(burn_in + M):
        omega = pg_sampler(X @ theta, rng)
        chol = _cholesky((X.T * omega) @ X + prior.precision)
        mean = linalg.cho_solve((chol, True), xk)
        theta = _mvn_from_precision(mean, chol, rng)
        if truncate and np.linalg.norm(theta) > radius:
            theta = _truncated_draw(mean, chol, rng, radius)
        if sweep >= burn_in:
            draws[sweep - burn_in] = theta
    return draws


@numba.njit(cache=True)
def _chol_inplace(A):
    n = A.shape[0]
    for j in range(n):
        s = A[j, j]
        for k in range(j):
            s -= A[j, k] * A[j, k]
        if not s > 0.0:
            return False
        A[j, j] = np.sqrt(s)
        for i in range(j + 1, n):
            s = A[i, j]
            for k in range(j):
                s -= A[i, k] * A[j, k]
            A[i, j] = s / A[j, j]
    return True


@numba.njit(cache=True)
def _gibbs_jit(X, xk, prec0, theta, burn_in, gen, draws):
    # same arithmetic and random-stream order as the reference loop in ``gibbs``
    n, d = X.shape
    M = draws.shape[0]
    psi = np.empty(n)
    omega = np.empty(n)
    P = np.empty((d, d))
    Xw = np.empty((d, n))
    y = np.empty(d)
    z = np.empty(d)
    for sweep in range(burn_in + M):
        for i in range(n):
            acc = 0.0
            for j in range(d):
                acc += X[i, j] * theta[j]
            psi[i] = acc
        _fill_pg1(psi, gen, omega)
        for i in range(n):
            w = omega[i]
            for a in range(d):
                Xw[a, i] = w * X[i, a]
        P[:, :] = np.dot(Xw, X) + prec0
        if not _chol_inplace(P):
            return sweep + 1
        # mean = P^{-1} xk via L y = xk, L^T mean = y
        for a in range(d):
            acc = xk[a]
            for k in range(a):
                acc -= P[a, k] * y[k]
            y[a] = acc / P[a, a]
        for a in range(d):
            z[a] = gen.standard_normal()
        # theta = mean + L^{-T} z, both from one back-substitution on y + z
        for a in range(d - 1, -1, -1):
            acc = y[a] + z[a]
            for k in range(a + 1, d):
                acc -= P[k, a] * theta[k]
            theta[a] = acc / P[a, a]
        if sweep >= burn_in:
            draws[sweep - burn_in] = theta
    return 0


def _mvn_from_precision(mean, chol, rng):
    # precision = L L^T  =>  L^{-T} z ~ N(0, precision^{-1})
    return mean + linalg.solve_triangular(chol.T, rng.standard_normal(mean.shape[0]), lower=False)


def _truncated_draw(mean, chol, rng, radius, max_tries: int = 100):
    for _ in range(max_tries):
        theta = _mvn_from_precision(mean, chol, rng)
        if np.linalg.norm(theta) <= radius:
            return theta
    cov = linalg.cho_solve((chol, True), np.eye(mean.shape[0]))
    return project_to_ellipsoid(theta, cov, radius)


@dataclass
class MLEFit:
    theta: np.ndarray
    converged: bool
    iterations: int
    grad_norm: float = field(default=np.inf)


def _penalized_loglik(theta, X, c, ridge):
    z = X @ theta
    return float(np.sum(c * log_sigmoid(z) + (1.0 - c) * log_sigmoid(-z)) - 0.5 * ridge * theta @ theta)


def fit_penalized_mle(
    data: Dataset,
    ridge: float = 1e-3,
    theta0=None,
    tol: float = 1e-8,
    max_iter: int = 100,
) -> MLEFit:
    """Maximise the logistic log-likelihood minus (ridge/2)|theta|^2 by damped Newton (IRLS) steps.

    Stops when the gradient's max-norm drops below ``tol``. If ``max_iter`` is
    reached first the last iterate is returned with ``converged=False``.
    """
    X, c = data.X, data.c
    d = data.d
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    theta = np.zeros(d) if theta0 is None else np.array(theta0, dtype=float)
    eye = np.eye(d)
    obj = _penalized_loglik(theta, X, c, ridge)
    grad_norm = np.inf
    for it in range(max_iter + 1):
        p = sigmoid(X @ theta)
        grad = X.T @ (c - p) - ridge * theta
        grad_norm = float(np.max(np.abs(grad))) if d else 0.0
        if grad_norm < tol:
            return MLEFit(theta, True, it, grad_norm)
        if it == max_iter:
            break
        hess = (X.T * (p * (1.0 - p))) @ X + ridge * eye
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError as exc:
            raise ValueError("singular Hessian: use ridge > 0 for empty or degenerate data") from exc
        t = 1.0
        # near the optimum objective changes fall below rounding, so allow a relative slack
        slack = 1e-12 * (1.0 + abs(obj))
        while True:
            cand = theta + t * step
            cand_obj = _penalized_loglik(cand, X, c, ridge)
            if cand_obj >= obj - slack or t < 1e-10:
                break
            t *= 0.5
        theta, obj = cand, cand_obj
    logger.warning("penalized MLE did not converge in %d iterations (|grad|=%.3g)", max_iter, grad_norm)
    return MLEFit(theta, False, max_iter, grad_norm)


def project_to_ellipsoid(theta, V, radius: float) -> np.ndarray:
    """argmin over |u|_2 <= radius of (u - theta)' V^{-1} (u - theta)."""
    theta = np.asarray(theta, dtype=float)
    norm = np.linalg.norm(theta)
    if norm <= radius:
        return theta.copy()
    lam, Q = np.linalg.eigh(np.asarray(V, dtype=float))
    if lam.min() <= 0:
        raise ValueError("V must be positive definite")
    a = 1.0 / lam  # eigenvalues of V^{-1}
    y = Q.T @ theta

    def excess(nu):
        return np.linalg.norm(a / (a + nu) * y) - radius

    # KKT: u(nu) = (A + nu I)^{-1} A theta, |u(nu)| decreasing in nu
    hi = a.max() * norm / radius
    nu = optimize.brentq(excess, 0.0, hi, xtol=1e-14, rtol=1e-14, maxiter=500)
    u = Q @ (a / (a + nu) * y)
    # land inside the closed ball so a second projection is the identity
    u = u * min(1.0, radius / np.linalg.norm(u))
    while np.linalg.norm(u) > radius:
        u = u * (1.0 - 2.0**-52)
    return u
