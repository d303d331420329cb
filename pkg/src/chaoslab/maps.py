"""Liverani-Saussol-Vaienti (Pomeau-Manneville) maps and random compositions.

    T_beta(x) = x + 2**beta * x**(1 + beta)   on [0, 1/2]
              = 2x - 1                        on (1/2, 1]

beta = 0 is the doubling map.  The left branch is written ``x * (1 + (2x)**beta)``
so that x = 1/2 lands on 1 exactly for every beta.
"""
from dataclasses import dataclass, field

import numpy as np

from . import rng
from ._jit import jit
from .errors import DomainError


def _check_beta(beta, upper=1.0):
    if not (0.0 <= beta < upper):
        raise DomainError(f"beta = {beta!r} outside [0, {upper:g})")


@dataclass(frozen=True)
class LsvSystem:
    beta: float

    def __post_init__(self):
        _check_beta(self.beta)

    def __call__(self, x):
        return lsv_step(x, self.beta)

    def orbit(self, x0, n):
        return lsv_orbit(x0, self.beta, n)


@jit
def step(x, beta):
    if x <= 0.5:
        y = x * (1.0 + (2.0 * x) ** beta)
    else:
        y = 2.0 * x - 1.0
    if y > 1.0:
        return 1.0
    if y < 0.0:
        return 0.0
    return y


@jit
def derivative(x, beta):
    """T'(x); on the left branch 1 + (1 + beta)(2x)**beta."""
    if x <= 0.5:
        return 1.0 + (1.0 + beta) * (2.0 * x) ** beta
    return 2.0


@jit
def left_branch_inverse(y, beta):
    """Scalar root of x * (1 + (2x)**beta) = y on [y/2, min(y, 1/2)].

    Newton from the lower bound y / (1 + (2y)**beta), falling back to
    bisection whenever a step leaves the bracket.
    """
    if y <= 0.0:
        return 0.0
    lo = 0.5 * y
    hi = min(y, 0.5)
    x = y / (1.0 + (2.0 * y) ** beta)
    for _ in range(200):
        pw = (2.0 * x) ** beta
        f = x * (1.0 + pw) - y
        if f > 0.0:
            hi = x
        elif f < 0.0:
            lo = x
        else:
            return x
        xn = x - f / (1.0 + (1.0 + beta) * pw)
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 1e-15 * x or hi - lo <= 1e-15 * x:
            return xn
        x = xn
    return x


def lsv_step(x, beta):
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"x = {x!r} outside [0, 1]")
    _check_beta(beta)
    return float(step(float(x), float(beta)))


def step_array(x, beta):
    """Vectorised branch map; ``beta`` may be a scalar or an array like ``x``."""
    x = np.asarray(x, dtype=np.float64)
    left = x * (1.0 + (2.0 * x) ** beta)
    return np.clip(np.where(x <= 0.5, left, 2.0 * x - 1.0), 0.0, 1.0)


def lsv_orbit(x0, beta, n):
    """Yield x0, T(x0), ..., T^n(x0)."""
    if not (0.0 <= x0 <= 1.0):
        raise DomainError(f"x0 = {x0!r} outside [0, 1]")
    _check_beta(beta)
    x = float(x0)
    b = float(beta)
    yield x
    for _ in range(n):
        x = step(x, b)
        yield x


@jit
def _orbit_array(x0, beta, n):
    out = np.empty(n + 1)
    out[0] = x0
    x = x0
    for k in range(n):
        x = step(x, beta)
        out[k + 1] = x
    return out


@jit
def _quenched_orbit_array(x0, betas):
    n = betas.shape[0]
    out = np.empty(n + 1)
    out[0] = x0
    x = x0
    for k in range(n):
        x = step(x, betas[k])
        out[k + 1] = x
    return out


def orbit_array(x0, beta, n):
    """Materialised orbit, length n + 1."""
    if not (0.0 <= x0 <= 1.0):
        raise DomainError(f"x0 = {x0!r} outside [0, 1]")
    _check_beta(beta)
    return _orbit_array(float(x0), float(beta), int(n))


@dataclass(frozen=True)
class QuenchedDriver:
    """Realised parameter sequence omega = (beta_k).

    ``law`` is ``("uniform", lo, hi)`` for i.i.d. uniform draws on [lo, hi) or
    ``("constant", b)``.  beta_k = lo + (hi - lo) * uniform(seed, k), so the
    sequence is random-access and reproducible from the seed alone.
    """

    law: tuple
    seed: int
    delta: float = 0.1
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        cap = 0.5 - self.delta
        if self.delta <= 0:
            raise DomainError("delta must be positive")
        kind = self.law[0]
        if kind == "uniform":
            lo, hi = float(self.law[1]), float(self.law[2])
            if not (0.0 <= lo < hi <= cap):
                raise DomainError(f"uniform law [{lo}, {hi}) must lie in [0, {cap:g}]")
        elif kind == "constant":
            if not (0.0 <= float(self.law[1]) < cap):
                raise DomainError(f"constant beta must lie in [0, {cap:g})")
        else:
            raise DomainError(f"unknown beta law {kind!r}")

    @classmethod
    def uniform(cls, lo, hi, seed, delta=0.1):
        return cls(("uniform", float(lo), float(hi)), int(seed), delta)

    @classmethod
    def constant(cls, beta, seed=0, delta=0.1):
        return cls(("constant", float(beta)), int(seed), delta)

    def betas(self, n, start=0):
        """beta_k for k in [start, start + n)."""
        if self.law[0] == "constant":
            return np.full(n, float(self.law[1]))
        lo, hi = self.law[1], self.law[2]
        u = rng.uniform_sequence(rng.derive(self.seed, 0), n, start)
        return lo + (hi - lo) * u

    def beta(self, k):
        return float(self.betas(1, k)[0])


def quenched_orbit(x0, driver, n):
    """Yield x0, T_{beta_0}(x0), T_{beta_1} T_{beta_0}(x0), ..."""
    if not (0.0 <= x0 <= 1.0):
        raise DomainError(f"x0 = {x0!r} outside [0, 1]")
    x = float(x0)
    yield x
    block = 4096
    done = 0
    while done < n:
        m = min(block, n - done)
        for b in driver.betas(m, done):
            x = step(x, float(b))
            yield x
        done += m


def quenched_orbit_array(x0, driver, n):
    return _quenched_orbit_array(float(x0), driver.betas(n))
