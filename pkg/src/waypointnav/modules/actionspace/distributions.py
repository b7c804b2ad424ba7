"""Truncated Gaussian and categorical distributions over torch tensors, with explicit random streams."""

import math
from typing import Optional, Union

import torch
from torch.distributions import Distribution, constraints
from torch.special import log_ndtr, ndtr, ndtri

_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)
_TINY = torch.finfo(torch.float64).tiny


def _log_mass(alpha: torch.Tensor, beta: torch.Tensor) -> torch.Tensor:
    """log(Φ(β) − Φ(α)) for α < β, evaluated on the side of zero where the difference does not cancel."""
    upper = alpha > 0
    lo = torch.where(upper, -beta, alpha)
    hi = torch.where(upper, -alpha, beta)
    log_hi, log_lo = log_ndtr(hi), log_ndtr(lo)
    return log_hi + torch.log1p(-torch.exp(log_lo - log_hi).clamp(max=1.0 - 1e-16))


class TruncatedGaussian(Distribution):
    """
    A Gaussian with mean `loc` and standard deviation `scale`, renormalised onto [`low`, `high`].

    Sampling inverts the CDF, so every draw lies within the bounds and is a differentiable function of the
    parameters given its uniform variate (see `icdf`).

    Args:
        loc: Mean of the underlying Gaussian.
        scale: Standard deviation of the underlying Gaussian, strictly positive.
        low: Lower bound.
        high: Upper bound, strictly greater than `low`.
    """

    arg_constraints = {"loc": constraints.real, "scale": constraints.positive}
    has_rsample = True

    def __init__(
        self,
        loc: Union[torch.Tensor, float],
        scale: Union[torch.Tensor, float],
        low: Union[torch.Tensor, float],
        high: Union[torch.Tensor, float],
        validate_args: Optional[bool] = None,
    ) -> None:
        loc, scale, low, high = torch.broadcast_tensors(
            *(torch.as_tensor(v, dtype=torch.float64) for v in (loc, scale, low, high))
        )
        if not bool((low < high).all()):
            raise ValueError("TruncatedGaussian needs low < high")
        self.loc, self.scale, self.low, self.high = loc, scale, low, high
        self.alpha = (low - loc) / scale
        self.beta = (high - loc) / scale
        self.log_z = _log_mass(self.alpha, self.beta)
        super().__init__(batch_shape=loc.shape, validate_args=validate_args)

    @constraints.dependent_property(is_discrete=False, event_dim=0)
    def support(self) -> constraints.Constraint:
        return constraints.interval(self.low, self.high)

    def _phi(self, z: torch.Tensor) -> torch.Tensor:
        return torch.exp(-0.5 * z**2 - _LOG_SQRT_2PI)

    @property
    def mean(self) -> torch.Tensor:
        z = torch.exp(self.log_z)
        return self.loc + self.scale * (self._phi(self.alpha) - self._phi(self.beta)) / z

    @property
    def variance(self) -> torch.Tensor:
        z = torch.exp(self.log_z)
        a_term = torch.where(torch.isfinite(self.alpha), self.alpha * self._phi(self.alpha), 0.0)
        b_term = torch.where(torch.isfinite(self.beta), self.beta * self._phi(self.beta), 0.0)
        shift = (self._phi(self.alpha) - self._phi(self.beta)) / z
        return self.scale**2 * (1 + (a_term - b_term) / z - shift**2)

    @property
    def mode(self) -> torch.Tensor:
        return torch.minimum(torch.maximum(self.loc, self.low), self.high)

    def entropy(self) -> torch.Tensor:
        z = torch.exp(self.log_z)
        a_term = torch.where(torch.isfinite(self.alpha), self.alpha * self._phi(self.alpha), 0.0)
        b_term = torch.where(torch.isfinite(self.beta), self.beta * self._phi(self.beta), 0.0)
        return 0.5 + _LOG_SQRT_2PI + torch.log(self.scale) + self.log_z + (a_term - b_term) / (2 * z)

    def log_prob(self, value: torch.Tensor) -> torch.Tensor:
        """Log density at `value`; `-inf` outside [low, high]."""
        value = torch.as_tensor(value, dtype=torch.float64)
        z = (value - self.loc) / self.scale
        log_density = -0.5 * z**2 - _LOG_SQRT_2PI - torch.log(self.scale) - self.log_z
        inside = (value >= self.low) & (value <= self.high)
        return torch.where(inside, log_density, torch.full_like(log_density, -math.inf))

    def cdf(self, value: torch.Tensor) -> torch.Tensor:
        value = torch.as_tensor(value, dtype=torch.float64)
        mass = (ndtr((value - self.loc) / self.scale) - ndtr(self.alpha)) / torch.exp(self.log_z)
        return mass.clamp(0.0, 1.0)

    def icdf(self, value: torch.Tensor) -> torch.Tensor:
        """
        The quantile of the uniform variate `value`, clamped into the bounds. Lower-tail quantiles are mirrored
        so that intervals far above the mean keep full precision.
        """
        u = torch.as_tensor(value, dtype=torch.float64)
        upper = self.alpha > 0
        lo = torch.where(upper, -self.beta, self.alpha)
        hi = torch.where(upper, -self.alpha, self.beta)
        u = torch.where(upper, 1 - u, u)
        p = ndtr(lo) + u * (ndtr(hi) - ndtr(lo))
        z = ndtri(p.clamp(_TINY, 1 - 1e-16))
        z = torch.where(upper, -z, z)
        return torch.minimum(torch.maximum(self.loc + self.scale * z, self.low), self.high)

    def uniforms(
        self, sample_shape: torch.Size = torch.Size(), generator: Optional[torch.Generator] = None
    ) -> torch.Tensor:
        return torch.rand(self._extended_shape(sample_shape), generator=generator, dtype=torch.float64)

    def rsample(
        self, sample_shape: torch.Size = torch.Size(), generator: Optional[torch.Generator] = None
    ) -> torch.Tensor:
        return self.icdf(self.uniforms(sample_shape, generator))

    def sample(
        self, sample_shape: torch.Size = torch.Size(), generator: Optional[torch.Generator] = None
    ) -> torch.Tensor:
        with torch.no_grad():
            return self.rsample(sample_shape, generator)


def truncnorm_sample(d: TruncatedGaussian, generator: Optional[torch.Generator] = None) -> float:
    return float(d.sample(generator=generator))


def truncnorm_logprob(d: TruncatedGaussian, x: float) -> float:
    return float(d.log_prob(torch.tensor(x, dtype=torch.float64)))


def truncnorm_entropy(d: TruncatedGaussian) -> float:
    return float(d.entropy())


def truncnorm_mode(d: TruncatedGaussian) -> float:
    return float(d.mode)


def categorical_sample(probs: torch.Tensor, generator: Optional[torch.Generator] = None) -> torch.Tensor:
    """One draw per row of `probs` (shape (..., k)) from the given stream."""
    flat = probs.detach().reshape(-1, probs.shape[-1])
    return torch.multinomial(flat, 1, generator=generator).reshape(probs.shape[:-1])


def categorical_entropy(logits: torch.Tensor) -> torch.Tensor:
    log_p = torch.log_softmax(logits, dim=-1)
    return -(torch.exp(log_p) * log_p).sum(dim=-1)
