"""Observables on [0, 1] and on billiard phase space.

Interval observables are linear combinations of a fixed basis so that numba
kernels can evaluate them from a coefficient vector:

    index  function
    0      1
    1      x
    2      x**2
    3      cos(2 pi x)
    4      sin(2 pi x)
    5      cos(4 pi x)
    6      sin(4 pi x)
    7      |x - 0.3|
    8      sign(x - 1/2)          (0 at x = 1/2)

Billiard observables are functions of the arclength q only, cos(2 pi k q / L)
or sin(2 pi k q / L); both have zero mean under the invariant measure.
"""
from dataclasses import dataclass, replace

import numpy as np

from ._jit import jit
from .errors import ConfigurationError

BASIS = ("one", "x", "x2", "cos1", "sin1", "cos2", "sin2", "kink", "sign")
NBASIS = len(BASIS)
KINK_AT = 0.3
TWO_PI = 2.0 * np.pi


@jit
def evaluate(coef, x):
    """Scalar evaluation of the basis expansion at x."""
    s = coef[0]
    if coef[1] != 0.0:
        s += coef[1] * x
    if coef[2] != 0.0:
        s += coef[2] * x * x
    if coef[3] != 0.0 or coef[4] != 0.0:
        a = TWO_PI * x
        s += coef[3] * np.cos(a) + coef[4] * np.sin(a)
    if coef[5] != 0.0 or coef[6] != 0.0:
        a = 2.0 * TWO_PI * x
        s += coef[5] * np.cos(a) + coef[6] * np.sin(a)
    if coef[7] != 0.0:
        s += coef[7] * abs(x - KINK_AT)
    if coef[8] != 0.0:
        if x > 0.5:
            s += coef[8]
        elif x < 0.5:
            s -= coef[8]
    return s


def evaluate_array(coef, x):
    """Vectorised counterpart of :func:`evaluate`."""
    x = np.asarray(x, dtype=np.float64)
    c = coef
    out = np.full(x.shape, c[0])
    if c[1]:
        out += c[1] * x
    if c[2]:
        out += c[2] * x * x
    if c[3] or c[4]:
        a = TWO_PI * x
        out += c[3] * np.cos(a) + c[4] * np.sin(a)
    if c[5] or c[6]:
        a = 2.0 * TWO_PI * x
        out += c[5] * np.cos(a) + c[6] * np.sin(a)
    if c[7]:
        out += c[7] * np.abs(x - KINK_AT)
    if c[8]:
        out += c[8] * np.sign(x - 0.5)
    return out


@dataclass(frozen=True)
class Observable:
    """phi(x) = sum_k coef[k] * basis_k(x) on [0, 1].

    ``mean_removed`` records that coef[0] has been shifted so the mean under
    some invariant measure is zero; ``holder_tag`` is an informal note
    (``lipschitz`` or ``bounded``).
    """

    coef: tuple
    name: str = "phi"
    mean_removed: bool = False
    holder_tag: str = "lipschitz"

    def __post_init__(self):
        if len(self.coef) != NBASIS:
            raise ConfigurationError(f"observable needs {NBASIS} coefficients")

    @classmethod
    def from_terms(cls, name="phi", **terms):
        coef = np.zeros(NBASIS)
        for key, val in terms.items():
            if key not in BASIS:
                raise ConfigurationError(f"unknown basis term {key!r}; choose from {BASIS}")
            coef[BASIS.index(key)] = float(val)
        tag = "bounded" if coef[8] else "lipschitz"
        return cls(tuple(coef), name, False, tag)

    @property
    def array(self):
        return np.asarray(self.coef, dtype=np.float64)

    def __call__(self, x):
        return evaluate_array(self.array, x)

    @property
    def value_at_zero(self):
        return float(evaluate_array(self.array, 0.0))

    def sup_norm(self, grid=20001):
        x = np.linspace(0.0, 1.0, grid)
        return float(np.max(np.abs(self(x))))

    def is_zero(self):
        return not np.any(self.array)

    def shifted(self, mean):
        """phi - mean, flagged as mean-removed."""
        c = self.array.copy()
        c[0] -= mean
        return replace(self, coef=tuple(c), mean_removed=True)

    def scaled(self, factor):
        return replace(self, coef=tuple(self.array * factor))

    def terms(self):
        return {k: v for k, v in zip(BASIS, self.coef) if v}


INTERVAL_PRESETS = {
    # phi(0) = 2 once the mean is removed this stays non-zero
    "one_plus_cos": dict(one=1.0, cos1=1.0),
    "cos": dict(cos1=1.0),
    "trig_kink": dict(cos1=1.0, sin2=0.5, kink=0.5),
    "linear": dict(x=1.0),
    # x - a x**2 vanishes at 0; ``a`` is fixed per beta so the mean is zero
    "vanishing_at_zero": dict(x=1.0, x2=-1.0),
    "sign": dict(sign=1.0),
    "constant": dict(one=1.0),
    "zero": dict(),
}


def interval_preset(name):
    if name not in INTERVAL_PRESETS:
        raise ConfigurationError(
            f"unknown observable {name!r}; choose from {sorted(INTERVAL_PRESETS)}"
        )
    return Observable.from_terms(name=name, **INTERVAL_PRESETS[name])


@dataclass(frozen=True)
class BilliardObservable:
    """psi(q, phi) = cos(2 pi k q / L) (kind 0) or sin(2 pi k q / L) (kind 1)."""

    kind: int = 0
    harmonic: int = 1
    name: str = "cos_q"

    def __call__(self, q, phi, total_length):
        a = TWO_PI * self.harmonic * np.asarray(q) / total_length
        return np.cos(a) if self.kind == 0 else np.sin(a)

    @property
    def code(self):
        return np.array([self.kind, self.harmonic], dtype=np.int64)


@jit
def billiard_value(code, q, total_length):
    a = TWO_PI * code[1] * q / total_length
    if code[0] == 0:
        return np.cos(a)
    return np.sin(a)


BILLIARD_PRESETS = {
    "cos_q": BilliardObservable(0, 1, "cos_q"),
    "sin_q": BilliardObservable(1, 1, "sin_q"),
    "cos_2q": BilliardObservable(0, 2, "cos_2q"),
}


def billiard_preset(name):
    if name not in BILLIARD_PRESETS:
        raise ConfigurationError(
            f"unknown billiard observable {name!r}; choose from {sorted(BILLIARD_PRESETS)}"
        )
    return BILLIARD_PRESETS[name]
