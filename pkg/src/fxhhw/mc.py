"""Monte Carlo oracle: full-truncation Euler under the domestic measure.

Simulates (log s, v, r_d, r_f) with correlated Gaussian increments from the
Cholesky factor of the correlation matrix; the foreign-rate drift carries the
quanto correction -eta_f*rho_sf*sqrt(v).  Payoffs are discounted pathwise by
the trapezoidal integral of r_d.  Mean-reversion levels are specified in
backward time by the model, so the forward simulation evaluates them at
T - t.  Deterministic for a fixed seed/config: the counter-based Philox
generator and fixed-size batch reduction make results independent of how the
work is chunked.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .errors import InvalidArgumentError, ModelConfigError
from .model import ModelParams, OptionSpec

CHOLESKY_SHIFT_TOL = 1e-10


@dataclass(frozen=True)
class McConfig:
    paths: int = 200_000
    steps_per_year: int = 200
    seed: int = 0
    antithetic: bool = False
    batch_size: int = 50_000

    def __post_init__(self):
        if self.paths < 1:
            raise InvalidArgumentError(f"paths must be >= 1, got {self.paths}")
        if self.steps_per_year < 1:
            raise InvalidArgumentError(
                f"steps_per_year must be >= 1, got {self.steps_per_year}"
            )
        if self.antithetic and self.paths % 2:
            raise InvalidArgumentError("antithetic sampling needs an even path count")


@dataclass(frozen=True)
class McEstimate:
    price: float
    stderr: float
    paths: int

    def interval(self, k=3.0):
        return (self.price - k * self.stderr, self.price + k * self.stderr)


def _chol(R):
    try:
        return np.linalg.cholesky(R)
    except np.linalg.LinAlgError:
        lam_min = float(np.linalg.eigvalsh(R)[0])
        if lam_min < -CHOLESKY_SHIFT_TOL:
            raise ModelConfigError(
                f"correlation matrix not Cholesky-decomposable (min eig {lam_min:.3e})"
            )
        shift = abs(lam_min) + 1e-14
        return np.linalg.cholesky(R + shift * np.eye(4))


def _simulate_batch(model, option, n, steps, dt, L, rng, antithetic, estimator):
    """Simulate one batch; returns per-path contributions."""
    if antithetic:
        half = n // 2
    x = np.full(n, np.log(model.s0))
    v = np.full(n, model.v0)
    rd = np.full(n, model.rd0)
    rf = np.full(n, model.rf0)
    T = option.maturity
    disc = np.zeros(n)  # trapezoidal integral of r_d
    rho_sf = model.rho_sf
    sqdt = sqrt(dt)
    for k in range(steps):
        t = k * dt
        z = rng.standard_normal((4, half if antithetic else n))
        if antithetic:
            z = np.concatenate([z, -z], axis=1)
        dw = (L @ z) * sqdt
        vp = np.maximum(v, 0.0)
        sq = np.sqrt(vp)
        disc += 0.5 * dt * rd
        # backward-time levels evaluated at tau = T - t
        th_d = float(model.theta_d(T - t))
        th_f = float(model.theta_f(T - t))
        x = x + (rd - rf - 0.5 * vp) * dt + sq * dw[0]
        v = v + model.kappa * (model.vbar - vp) * dt + model.gamma * sq * dw[1]
        rd = rd + model.lambda_d * (th_d - rd) * dt + model.eta_d * dw[2]
        rf = (
            rf
            + (model.lambda_f * (th_f - rf) - model.eta_f * rho_sf * sq) * dt
            + model.eta_f * dw[3]
        )
        disc += 0.5 * dt * rd
    s_T = np.exp(x)
    df = np.exp(-disc)
    if estimator == "price":
        return df * option.payoff(s_T)
    # pathwise delta
    if option.kind == "call":
        return df * (s_T > option.strike) * s_T / model.s0
    return -df * (s_T < option.strike) * s_T / model.s0


def _run(model, option, cfg, estimator):
    L = _chol(model.correlation)
    steps = max(1, int(round(cfg.steps_per_year * option.maturity)))
    dt = option.maturity / steps
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    batch = cfg.batch_size + (cfg.batch_size % 2 if cfg.antithetic else 0)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < cfg.paths:
        n = min(batch, cfg.paths - done)
        samples = _simulate_batch(
            model, option, n, steps, dt, L, rng, cfg.antithetic, estimator
        )
        if cfg.antithetic:
            half = n // 2
            samples = 0.5 * (samples[:half] + samples[half:])
        total += float(np.sum(samples))
        total_sq += float(np.sum(samples * samples))
        done += n
    n_eff = cfg.paths // 2 if cfg.antithetic else cfg.paths
    mean = total / n_eff
    if n_eff > 1:
        var = max(total_sq - n_eff * mean * mean, 0.0) / (n_eff - 1)
        stderr = sqrt(var / n_eff)
    else:
        stderr = 0.0
    return McEstimate(price=mean, stderr=stderr, paths=cfg.paths)


def simulate_price(model: ModelParams, option: OptionSpec, cfg: McConfig) -> McEstimate:
    """Discounted-payoff estimate with standard error."""
    return _run(model, option, cfg, "price")


def pathwise_delta(model: ModelParams, option: OptionSpec, cfg: McConfig) -> McEstimate:
    """Pathwise delta E[1_{ITM} * s_T/s_0 * discount] (sign-flipped for puts)."""
    return _run(model, option, cfg, "delta")
