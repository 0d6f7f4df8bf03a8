"""Denoising-diffusion arithmetic: noise schedules, forward corruption,
posterior parameters, one reverse step, and classifier-free guidance.

Conventions: diffusion steps are indexed t = 1..T, with cumulative products
abar[0] = 1 so that the final reverse step (t = 1) is deterministic. All
stochasticity is injected by the caller through explicit noise arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NoiseSchedule",
    "PosteriorParams",
    "DiffusionConfig",
    "linear_schedule",
    "cosine_schedule",
    "schedule_from_json",
    "schedule_to_json",
    "q_sample",
    "posterior_params",
    "ddpm_step",
    "cfg_combine",
]


@dataclass(frozen=True, eq=False)
class NoiseSchedule:
    """Per-step noise levels. ``betas[t-1]`` is beta_t; ``alphabars[t]`` is
    the cumulative product of alpha with ``alphabars[0] == 1``."""

    kind: str
    T: int
    betas: np.ndarray
    alphas: np.ndarray
    alphabars: np.ndarray

    def __post_init__(self) -> None:
        if self.T < 1 or len(self.betas) != self.T or len(self.alphabars) != self.T + 1:
            raise ValueError("inconsistent schedule table sizes")
        if np.any(self.betas <= 0) or np.any(self.betas >= 1):
            raise ValueError("betas must lie strictly inside (0, 1)")
        if self.alphabars[0] != 1.0 or np.any(np.diff(self.alphabars) >= 0):
            raise ValueError("alphabar must start at 1 and decrease strictly")

    def beta(self, t: int) -> float:
        return float(self.betas[t - 1])

    def alpha(self, t: int) -> float:
        return float(self.alphas[t - 1])

    def alphabar(self, t: int) -> float:
        return float(self.alphabars[t])


def _from_betas(kind: str, betas: np.ndarray) -> NoiseSchedule:
    alphas = 1.0 - betas
    alphabars = np.concatenate([[1.0], np.cumprod(alphas)])
    return NoiseSchedule(kind=kind, T=len(betas), betas=betas,
                         alphas=alphas, alphabars=alphabars)


def linear_schedule(T: int = 1000, beta1: float = 1e-4, betaT: float = 0.02) -> NoiseSchedule:
    """Betas linearly interpolated from beta1 to betaT inclusive."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if not (0.0 < beta1 <= betaT < 1.0):
        raise ValueError(f"need 0 < beta1 <= betaT < 1, got {beta1}, {betaT}")
    return _from_betas("linear", np.linspace(beta1, betaT, T))


def cosine_schedule(T: int = 100, s: float = 0.008) -> NoiseSchedule:
    """Cosine cumulative schedule: abar_t = f(t)/f(0) with
    f(u) = cos^2(((u/T + s)/(1 + s)) * pi/2), betas clipped to (0, 0.999]."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if s < 0:
        raise ValueError("s must be >= 0")
    u = np.arange(T + 1, dtype=float)
    f = np.cos(((u / T + s) / (1.0 + s)) * (np.pi / 2.0)) ** 2
    abar = f / f[0]
    betas = 1.0 - abar[1:] / abar[:-1]
    betas = np.clip(betas, 1e-12, 0.999)
    return _from_betas("cosine", betas)


def schedule_from_json(spec: dict) -> NoiseSchedule:
    kind = spec.get("kind", "cosine")
    if kind == "cosine":
        return cosine_schedule(T=int(spec.get("T", 100)), s=float(spec.get("s", 0.008)))
    if kind == "linear":
        return linear_schedule(T=int(spec.get("T", 1000)),
                               beta1=float(spec.get("beta1", 1e-4)),
                               betaT=float(spec.get("betaT", 0.02)))
    raise ValueError(f"unknown schedule kind {kind!r}")


def schedule_to_json(sched: NoiseSchedule) -> dict:
    return {"kind": sched.kind, "T": sched.T}


@dataclass(frozen=True)
class PosteriorParams:
    """Gaussian parameters of q(x_{t-1} | x_t, x0): mean array, scalar variance."""

    mean: np.ndarray
    var: float


@dataclass(frozen=True)
class DiffusionConfig:
    schedule: NoiseSchedule
    guidance_scale: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not np.isfinite(self.guidance_scale):
            raise ValueError("guidance scale must be finite")


def _check_shapes(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise ValueError(f"{what}: shape mismatch {a.shape} vs {b.shape}")


def _check_t(t: int, sched: NoiseSchedule) -> None:
    if not 1 <= t <= sched.T:
        raise ValueError(f"step {t} outside 1..{sched.T}")


def q_sample(x0: np.ndarray, t: int, eps: np.ndarray, sched: NoiseSchedule) -> np.ndarray:
    """Forward corruption: sqrt(abar_t) x0 + sqrt(1 - abar_t) eps."""
    _check_t(t, sched)
    x0 = np.asarray(x0, dtype=float)
    eps = np.asarray(eps, dtype=float)
    _check_shapes(x0, eps, "q_sample")
    ab = sched.alphabar(t)
    return np.sqrt(ab) * x0 + np.sqrt(1.0 - ab) * eps


def posterior_params(x_t: np.ndarray, x0_hat: np.ndarray, t: int,
                     sched: NoiseSchedule) -> PosteriorParams:
    """Mean and variance of q(x_{t-1} | x_t, x0 = x0_hat).

    mean = sqrt(alpha_t)(1 - abar_{t-1})/(1 - abar_t) x_t
         + sqrt(abar_{t-1}) beta_t /(1 - abar_t) x0_hat
    var  = (1 - abar_{t-1})/(1 - abar_t) beta_t
    """
    _check_t(t, sched)
    x_t = np.asarray(x_t, dtype=float)
    x0_hat = np.asarray(x0_hat, dtype=float)
    _check_shapes(x_t, x0_hat, "posterior_params")
    ab_t, ab_p = sched.alphabar(t), sched.alphabar(t - 1)
    beta = sched.beta(t)
    denom = 1.0 - ab_t
    c_xt = np.sqrt(sched.alpha(t)) * (1.0 - ab_p) / denom
    c_x0 = np.sqrt(ab_p) * beta / denom
    var = (1.0 - ab_p) / denom * beta
    return PosteriorParams(mean=c_xt * x_t + c_x0 * x0_hat, var=float(var))


def ddpm_step(x_t: np.ndarray, x0_hat: np.ndarray, t: int, sched: NoiseSchedule,
              noise: np.ndarray | None = None) -> np.ndarray:
    """One reverse step: sample from the x0-conditioned posterior.

    At t = 1 the posterior collapses (abar_0 = 1), so x0_hat is returned
    exactly and ``noise`` is ignored.
    """
    _check_t(t, sched)
    if t == 1:
        return np.asarray(x0_hat, dtype=float)
    post = posterior_params(x_t, x0_hat, t, sched)
    if noise is None:
        raise ValueError("noise is required for steps t > 1")
    noise = np.asarray(noise, dtype=float)
    _check_shapes(post.mean, noise, "ddpm_step")
    return post.mean + np.sqrt(post.var) * noise


def cfg_combine(x0_cond: np.ndarray, x0_uncond: np.ndarray, scale: float) -> np.ndarray:
    """Classifier-free guidance: uncond + scale * (cond - uncond)."""
    x0_cond = np.asarray(x0_cond, dtype=float)
    x0_uncond = np.asarray(x0_uncond, dtype=float)
    _check_shapes(x0_cond, x0_uncond, "cfg_combine")
    return x0_uncond + scale * (x0_cond - x0_uncond)
