"""Gaussian-surrogate chains, truncation, and the limiting standard deviation.

The surrogate chain replaces the bootstrap transition (resample data, refit)
by the additive Gaussian step state + xi(state)/sqrt(n). Truncation zeroes a
drawn xi when its norm reaches delta*sqrt(n), so each truncated step moves
the state by strictly less than delta and a chain started at theta stays
within k*delta of it after k steps.

Truncation here is per draw, on the norm of xi at the current state. An
alternative rule would condition on the sup of the noise process over all
states, but that sup is not observable for state-dependent noise; for
constant-noise models the two events coincide, and at the default delta the
truncation probability is negligible by design.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import functionals, models
from .bootstrap import ABORT_RATE_LIMIT, ChainPath, EstimationError, fk_from_states


@dataclass(frozen=True)
class TruncationRule:
    """Zero a drawn xi(theta) when ||xi(theta)|| >= delta * sqrt(n)."""

    delta: float
    n: int

    def __post_init__(self):
        if not (self.delta > 0 and self.n >= 1):
            raise ValueError("need delta > 0 and n >= 1")

    @property
    def threshold(self) -> float:
        return self.delta * math.sqrt(self.n)


@dataclass(frozen=True)
class HomotopyFlags:
    """Binary time flags (t_1, ..., t_k) selecting which surrogate steps fire."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("flags must be binary")
        object.__setattr__(self, "bits", bits)


def default_delta(model, theta, n: int) -> float:
    """delta = 3 sqrt(tr Sigma(theta) / n): truncation probability ~ 0 at the
    configured scale (Gaussian norm concentration)."""
    tr = float(np.trace(models.sigma(model, theta)))
    return 3.0 * math.sqrt(tr / n)


def _truncate(xi: np.ndarray, trunc: TruncationRule | None) -> np.ndarray:
    if trunc is None:
        return xi
    norms = np.linalg.norm(xi, axis=-1)
    return np.where((norms >= trunc.threshold)[..., None], 0.0, xi)


def tilde_chain_block(
    model, start, k: int, n: int, m: int, rng, trunc: TruncationRule | None = None
) -> np.ndarray:
    """M surrogate chains at once: states of shape (k+1, M, d)."""
    start = np.asarray(start, dtype=float)
    if start.ndim == 1:
        start = np.broadcast_to(start, (m, start.shape[0]))
    states = np.empty((k + 1,) + start.shape)
    states[0] = start
    root_n = math.sqrt(n)
    for j in range(k):
        xi = models.sample_xi_block(model, states[j], rng)
        states[j + 1] = states[j] + _truncate(xi, trunc) / root_n
    return states


def simulate_tilde_chain(
    model, theta, k: int, n: int, rng, trunc: TruncationRule | None = None
) -> ChainPath:
    """One surrogate chain (optionally truncated) started at theta."""
    states = tilde_chain_block(model, theta, k, n, 1, rng, trunc=trunc)
    return ChainPath(states=states[:, 0, :])


def sigma_f(model, f, theta) -> float:
    """Limiting standard deviation sqrt(<Sigma(theta) f'(theta), f'(theta)>),
    clamped at zero against rounding."""
    theta = np.asarray(theta, dtype=float)
    g = functionals.grad(f, theta)
    quad = float(g @ models.sigma(model, theta) @ g)
    return math.sqrt(max(quad, 0.0))


def superposition_eval(model, theta, flags, n: int, rng) -> np.ndarray:
    """Apply the flagged surrogate steps G_j(.) = . + t_j xi_j(.)/sqrt(n)
    sequentially; binary flags make this equal in law to skipping the steps
    with t_j = 0, which is how it is computed."""
    return superposition_block(model, theta, flags, n, 1, rng)[0]


def superposition_block(model, theta, flags, n: int, m: int, rng) -> np.ndarray:
    """M independent draws of the flag superposition: shape (M, d)."""
    bits = flags.bits if isinstance(flags, HomotopyFlags) else HomotopyFlags(tuple(flags)).bits
    theta = np.asarray(theta, dtype=float)
    states = np.broadcast_to(theta, (m, theta.shape[0])).copy()
    root_n = math.sqrt(n)
    for t in bits:
        if t:
            states = states + models.sample_xi_block(model, states, rng) / root_n
    return states


def tilde_fk_estimate(
    model, f, theta_hat, k: int, n: int, delta: float | None, m: int, rng
) -> float:
    """fk_estimate with truncated surrogate chains in place of bootstrap
    chains; delta None or inf disables truncation."""
    theta_hat = np.asarray(theta_hat, dtype=float)
    if k == 0:
        return float(functionals.value(f, theta_hat))
    if m < 1:
        raise ValueError("need at least one chain when k >= 1")
    trunc = None
    if delta is not None and math.isfinite(delta):
        trunc = TruncationRule(delta=delta, n=n)
    states = tilde_chain_block(model, theta_hat, k, n, m, rng, trunc=trunc)
    mean, _, aborted = fk_from_states(f, states)
    if aborted > ABORT_RATE_LIMIT * m:
        raise EstimationError(f"{aborted}/{m} chains aborted")
    return mean


def xi_squared_norm(model, theta, draws: int, rng) -> tuple[float, float]:
    """Monte Carlo (mean, standard error) of ||xi(theta)||^2; its target is
    tr Sigma(theta). This second moment is the computable complexity measure
    of the surrogate noise that the risk bounds are driven by."""
    theta = np.asarray(theta, dtype=float)
    xi = models.sample_xi_block(model, np.broadcast_to(theta, (draws, theta.shape[0])), rng)
    sq = np.sum(xi * xi, axis=1)
    return float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(draws))
