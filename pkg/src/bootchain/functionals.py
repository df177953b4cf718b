"""Smooth target functionals f with analytic gradients.

All built-ins are analytic (declared smoothness = inf); finite-smoothness
worst cases are a research problem and are emulated by the experiment
design, not by non-smooth functions. Every operation accepts parameter
arrays with arbitrary leading batch dimensions (the last axis is the
coordinate axis), which the chain machinery relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

VARIANTS = ("linear", "power", "quadratic_form", "exp_linear", "radial")
RADIAL_PROFILES = ("exp_neg", "log1p")


@dataclass(frozen=True)
class Functional:
    """A target f: R^d -> R. Q is None for the identity quadratic form
    (dimension-generic, usable in sweeps where d varies)."""

    variant: str
    u: np.ndarray | None = None
    p: int | None = None
    Q: np.ndarray | None = None
    profile: str | None = None
    smoothness: float = math.inf


def linear(u) -> Functional:
    return Functional("linear", u=np.asarray(u, dtype=float))


def power(u, p: int) -> Functional:
    if not isinstance(p, int) or p < 1:
        raise ValueError("power exponent must be a positive integer")
    return Functional("power", u=np.asarray(u, dtype=float), p=p)


def quadratic_form(Q=None) -> Functional:
    if Q is not None:
        Q = np.asarray(Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError("Q must be square")
    return Functional("quadratic_form", Q=Q)


def exp_linear(u) -> Functional:
    return Functional("exp_linear", u=np.asarray(u, dtype=float))


def radial(profile: str) -> Functional:
    if profile not in RADIAL_PROFILES:
        raise ValueError(f"unknown radial profile {profile!r}")
    return Functional("radial", profile=profile)


def value(f: Functional, theta) -> float | np.ndarray:
    """Evaluate f at theta; theta may be (d,) or (..., d)."""
    t = np.asarray(theta, dtype=float)
    if f.variant == "linear":
        out = t @ f.u
    elif f.variant == "power":
        out = (t @ f.u) ** f.p
    elif f.variant == "quadratic_form":
        if f.Q is None:
            out = np.sum(t * t, axis=-1)
        else:
            out = np.sum((t @ f.Q) * t, axis=-1)
    elif f.variant == "exp_linear":
        out = np.exp(t @ f.u)
    elif f.variant == "radial":
        r2 = np.sum(t * t, axis=-1)
        out = np.exp(-r2) if f.profile == "exp_neg" else np.log1p(r2)
    else:
        raise ValueError(f"unknown functional variant {f.variant!r}")
    return float(out) if out.ndim == 0 else out


def grad(f: Functional, theta) -> np.ndarray:
    """Analytic gradient of f at theta; batches like value()."""
    t = np.asarray(theta, dtype=float)
    if f.variant == "linear":
        return np.broadcast_to(f.u, t.shape).copy()
    if f.variant == "power":
        s = (t @ f.u) ** (f.p - 1)
        return f.p * s[..., None] * f.u
    if f.variant == "quadratic_form":
        if f.Q is None:
            return 2.0 * t
        return t @ (f.Q + f.Q.T)
    if f.variant == "exp_linear":
        return np.exp(t @ f.u)[..., None] * f.u
    if f.variant == "radial":
        r2 = np.sum(t * t, axis=-1)
        g1 = -np.exp(-r2) if f.profile == "exp_neg" else 1.0 / (1.0 + r2)
        return 2.0 * g1[..., None] * t
    raise ValueError(f"unknown functional variant {f.variant!r}")


def grad_check(f: Functional, theta, h: float = 1e-5) -> float:
    """Max relative error of the analytic gradient against central differences.

    Relative error per coordinate is |fd - analytic| / (1 + |analytic|); the
    1 in the denominator avoids blowup near gradient zeros.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    t = np.asarray(theta, dtype=float)
    g = grad(f, t)
    worst = 0.0
    for i in range(t.shape[0]):
        tp = t.copy()
        tm = t.copy()
        tp[i] += h
        tm[i] -= h
        fd = (value(f, tp) - value(f, tm)) / (2.0 * h)
        worst = max(worst, abs(fd - g[i]) / (1.0 + abs(g[i])))
    return worst
