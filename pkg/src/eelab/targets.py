"""Target distributions for multimodal sampling experiments.

Every target is expressed through its energy function h(x) = -log pi(x),
known up to one additive constant per target. Low energy means high density.
The Gaussian-mixture targets cover the two benchmark settings (equal
variances with strong +/- correlation, and variances differing by a factor
of 10^4); the 1-D gamma target with shape < 1 provides a density that is
unbounded at the origin.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "ModeDescriptor",
    "TargetDistribution",
    "GaussianMixtureParams",
    "mixture_energy",
    "gaussian_mixture_target",
    "make_example1",
    "make_example2",
    "make_gamma_target",
]


def _check_spd(matrix: np.ndarray, name: str) -> np.ndarray:
    """Return the Cholesky factor of `matrix`, raising ValueError if not SPD."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {matrix.shape}")
    if not np.allclose(matrix, matrix.T, rtol=1e-12, atol=1e-12):
        raise ValueError(f"{name} must be symmetric")
    try:
        return np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"{name} must be positive definite") from exc


@dataclass
class ModeDescriptor:
    """A declared mode: its location and the local (component) covariance."""

    location: np.ndarray
    local_covariance: np.ndarray

    def __post_init__(self):
        self.location = np.asarray(self.location, dtype=float)
        self.local_covariance = np.asarray(self.local_covariance, dtype=float)
        _check_spd(self.local_covariance, "local_covariance")
        if self.local_covariance.shape[0] != self.location.shape[0]:
            raise ValueError("location and local_covariance dimensions disagree")


@dataclass
class TargetDistribution:
    """A target known through its energy h(x) = -log pi(x) + const.

    `energy_fn` must return a finite float wherever the density is strictly
    positive and may return +inf outside the support (kernels treat the +inf
    sentinel as an automatic rejection). Instances are immutable in practice
    and safe to evaluate concurrently.
    """

    dim: int
    energy_fn: Callable[[np.ndarray], float]
    mode_info: list[ModeDescriptor] | None = None


class GaussianMixtureParams:
    """Parameters of a Gaussian mixture sum_i w_i N(mu_i, Sigma_i).

    Validates that the weights are positive and sum to one (within 1e-12)
    and that every covariance is symmetric positive definite. Inverse
    covariances and log normalizing constants are precomputed once; the
    instance is immutable afterwards.
    """

    def __init__(self, weights, means, covariances):
        self.weights = np.asarray(weights, dtype=float)
        self.means = np.asarray(means, dtype=float)
        self.covariances = np.asarray(covariances, dtype=float)
        if self.weights.ndim != 1 or self.means.ndim != 2 or self.covariances.ndim != 3:
            raise ValueError("expected weights (m,), means (m,dim), covariances (m,dim,dim)")
        m = len(self.weights)
        if self.means.shape[0] != m or self.covariances.shape[0] != m:
            raise ValueError("weights, means, and covariances must have matching lengths")
        if np.any(self.weights <= 0):
            raise ValueError("mixture weights must be strictly positive")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to 1 within 1e-12")
        dim = self.means.shape[1]
        if self.covariances.shape[1:] != (dim, dim):
            raise ValueError("covariance shapes do not match the mean dimension")
        for i, cov in enumerate(self.covariances):
            _check_spd(cov, f"covariance {i}")
        self.dim = dim
        self._inv_covs = np.linalg.inv(self.covariances)
        sign, logdet = np.linalg.slogdet(self.covariances)
        if np.any(sign <= 0):
            raise ValueError("covariances must have positive determinant")
        self._log_coefs = (
            np.log(self.weights) - 0.5 * (dim * math.log(2.0 * math.pi) + logdet)
        )
        # Scalar fast path for bivariate mixtures: the sampler evaluates the
        # energy once per step, so plain float arithmetic pays off over
        # numpy's small-array overhead.
        if dim == 2:
            self._scalar_comps = [
                (
                    float(self.means[i, 0]),
                    float(self.means[i, 1]),
                    float(self._inv_covs[i, 0, 0]),
                    float(self._inv_covs[i, 0, 1]),
                    float(self._inv_covs[i, 1, 1]),
                    float(self._log_coefs[i]),
                )
                for i in range(m)
            ]
        else:
            self._scalar_comps = None

    @property
    def n_components(self) -> int:
        return len(self.weights)

    def energy(self, x) -> float:
        """Mixture energy -log f(x), evaluated via log-sum-exp."""
        if self._scalar_comps is not None:
            if len(x) != 2:
                raise ValueError(f"point has length {len(x)}, expected 2")
            x0 = float(x[0])
            x1 = float(x[1])
            best = -math.inf
            vals = []
            for m0, m1, a, b, c, lc in self._scalar_comps:
                d0 = x0 - m0
                d1 = x1 - m1
                v = lc - 0.5 * (a * d0 * d0 + 2.0 * b * d0 * d1 + c * d1 * d1)
                vals.append(v)
                if v > best:
                    best = v
            acc = 0.0
            for v in vals:
                acc += math.exp(v - best)
            return -(best + math.log(acc))
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"point has shape {x.shape}, expected ({self.dim},)")
        d = x - self.means
        quad = np.einsum("md,mde,me->m", d, self._inv_covs, d)
        vals = self._log_coefs - 0.5 * quad
        peak = vals.max()
        return float(-(peak + math.log(np.exp(vals - peak).sum())))

    def modes(self) -> list[ModeDescriptor]:
        """One ModeDescriptor per mixture component."""
        return [
            ModeDescriptor(self.means[i].copy(), self.covariances[i].copy())
            for i in range(self.n_components)
        ]


def mixture_energy(params: GaussianMixtureParams, x) -> float:
    """Energy -log f(x) of the mixture density at point x.

    Uses the log-sum-exp form, so component log densities as low as -700
    and beyond do not underflow.
    """
    return params.energy(x)


def gaussian_mixture_target(params: GaussianMixtureParams) -> TargetDistribution:
    """Wrap mixture parameters as a TargetDistribution with declared modes."""
    return TargetDistribution(dim=params.dim, energy_fn=params.energy, mode_info=params.modes())


def _correlated_cov(sigma1: float, sigma2: float, rho: float) -> np.ndarray:
    off = sigma1 * sigma2 * rho
    return np.array([[sigma1 * sigma1, off], [off, sigma2 * sigma2]])


def make_example1() -> tuple[TargetDistribution, GaussianMixtureParams]:
    """Equal-weight bivariate mixture with strong +0.99 / -0.99 correlations.

    Means (0,0) and (5,5), unit marginal variances. The two components have
    equal determinant, so the minimum energy (about 0.573) is attained at
    both means.
    """
    params = GaussianMixtureParams(
        weights=[0.5, 0.5],
        means=[[0.0, 0.0], [5.0, 5.0]],
        covariances=[_correlated_cov(1.0, 1.0, 0.99), _correlated_cov(1.0, 1.0, -0.99)],
    )
    return gaussian_mixture_target(params), params


def make_example2() -> tuple[TargetDistribution, GaussianMixtureParams]:
    """Equal-weight bivariate mixture with variances differing by 10^4.

    Same means and weights as example 1, but component one has marginal
    standard deviation 0.01 and component two 1.0 (both uncorrelated). The
    global energy minimum is about -6.679 near (0,0); the wide mode's floor
    is log(4*pi), about 2.531.
    """
    params = GaussianMixtureParams(
        weights=[0.5, 0.5],
        means=[[0.0, 0.0], [5.0, 5.0]],
        covariances=[np.diag([1e-4, 1e-4]), np.eye(2)],
    )
    return gaussian_mixture_target(params), params


def make_gamma_target(shape: float, rate: float) -> TargetDistribution:
    """1-D gamma target restricted to shape in (0,1), where the density is
    unbounded as x -> 0+.

    Energy is -(shape-1)*log(x) + rate*x for x > 0 and +inf for x <= 0, so
    proposals outside the support are rejected by the kernels without any
    special casing.
    """
    if not 0.0 < shape < 1.0:
        raise ValueError("shape must lie in (0, 1); this target exists for the unbounded-density case")
    if rate <= 0.0:
        raise ValueError("rate must be positive")
    shape_minus_one = shape - 1.0

    def energy(x) -> float:
        v = float(x[0])
        if v <= 0.0:
            return math.inf
        return -shape_minus_one * math.log(v) + rate * v

    return TargetDistribution(dim=1, energy_fn=energy, mode_info=None)
