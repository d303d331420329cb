"""Line-oriented experiment configuration.

Format: UTF-8, one ``key = value`` per line, ``#`` starts a comment, flat
namespace with dotted keys (``hole.radii``, ``table.rho``).  Lists are
comma separated.  Keys under ``table.`` are passed to the billiard preset
constructor as floats.
"""
import hashlib
import math
from dataclasses import dataclass

from ..billiards.presets import PRESETS
from ..errors import ConfigurationError
from ..observables import BILLIARD_PRESETS, INTERVAL_PRESETS

KINDS = (
    "simulate", "density", "return-tail", "ldp", "max-ldp", "poisson", "hitting",
    "clt", "quenched-clt", "stable", "cusp-stable", "mean-free-path",
)
BILLIARD_KINDS = ("poisson", "hitting", "cusp-stable", "mean-free-path")
# keys that change how a run executes but not what it computes
EXECUTION_KEYS = ("workers", "out")


class ConfigError(ConfigurationError):
    """Carries every problem found, each as a separate message."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def _int(text):
    v = float(text) if any(c in text for c in ".eE") else int(text)
    if isinstance(v, float):
        if not v.is_integer():
            raise ValueError(f"{text!r} is not an integer")
        v = int(v)
    return v


def _float(text):
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(f"{text!r} is not finite")
    return v


def _list(conv):
    def parse(text):
        items = [t.strip() for t in text.split(",") if t.strip()]
        if not items:
            raise ValueError("empty list")
        return tuple(conv(t) for t in items)

    return parse


def _str(text):
    return text


# name -> (parser, check, constraint text); check returns True when valid
_pos = (lambda v: v > 0, "> 0")
_nonneg = (lambda v: v >= 0, ">= 0")
_all_pos = (lambda v: all(x > 0 for x in v), "all > 0")
FIELDS = {
    "experiment": (_str, lambda v: v in KINDS, f"one of {', '.join(KINDS)}"),
    "seed": (_int, lambda v: 0 <= v < 2**64, "in [0, 2^64)"),
    "workers": (_int, lambda v: 1 <= v <= 2**16, "in [1, 65536]"),
    "out": (_str, lambda v: bool(v), "non-empty"),
    "system": (_str, lambda v: v in ("lsv", "bernoulli") or v in PRESETS,
               "lsv, bernoulli or a billiard preset"),
    "beta": (_float, lambda v: 0 <= v < 1, "beta ∉ [0,1)"),
    "observable": (_str, lambda v: v in INTERVAL_PRESETS or v in BILLIARD_PRESETS,
                   "a known observable preset"),
    "n": (_int, *_pos),
    "samples": (_int, *_pos),
    "bins": (_int, lambda v: v >= 16, ">= 16"),
    "x0": (_float, lambda v: 0 <= v <= 1, "in [0, 1]"),
    "q0": (_float, *_nonneg),
    "phi0": (_float, lambda v: abs(v) < math.pi / 2, "|phi0| < pi/2"),
    "epsilon": (_float, *_nonneg),
    "epsilon_fraction": (_float, *_pos),
    "n_grid": (_list(_int), _all_pos[0], "all > 0"),
    "horizon_factor": (_int, lambda v: v >= 10, ">= 10"),
    "tolerance": (_float, *_pos),
    "k_max": (_int, *_pos),
    "burn_in": (_int, *_nonneg),
    "beta_lo": (_float, lambda v: 0 <= v < 0.5, "in [0, 1/2)"),
    "beta_hi": (_float, lambda v: 0 < v < 0.5, "in (0, 1/2)"),
    "omega_seeds": (_list(_int), lambda v: all(0 <= s < 2**64 for s in v), "all in [0, 2^64)"),
    "scale_tolerance": (_float, *_pos),
    "hole.radii": (_list(_float), _all_pos[0], "all > 0"),
    "hole.radius": (_float, *_pos),
    "hole.center": (_float, *_nonneg),
    "hole.horizon": (_float, *_pos),
    "windows": (_int, *_pos),
    "T": (_float, *_pos),
    "bootstrap": (_int, *_nonneg),
    "t_grid": (_list(_float), _all_pos[0], "all > 0"),
}
TABLE_PREFIX = "table."

DEFAULTS = {
    "seed": 0,
    "system": "lsv",
    "observable": "trig_kink",
    "bins": 64,
    "x0": 0.3,
    "q0": 0.1,
    "phi0": 0.3,
    "horizon_factor": 10,
    "epsilon_fraction": 0.1,
    "k_max": 200,
    "burn_in": 10_000,
    "beta_lo": 0.0,
    "beta_hi": 0.4,
    "omega_seeds": (1, 2),
    "scale_tolerance": 0.1,
    "hole.radii": (0.05, 0.02, 0.01, 0.005),
    "hole.radius": 0.01,
    "hole.horizon": 50.0,
    "windows": 5,
    "T": 5.0,
    "bootstrap": 200,
    "t_grid": (0.5, 1.0, 2.0),
}

# fields an experiment cannot run without
REQUIRED = {
    "simulate": ("n",),
    "density": ("beta",),
    "return-tail": ("beta", "n_grid", "samples"),
    "ldp": ("beta", "n_grid", "samples"),
    "max-ldp": ("beta", "n_grid", "samples"),
    "poisson": ("samples",),
    "hitting": ("samples",),
    "clt": ("beta", "n", "samples"),
    "quenched-clt": ("n", "samples"),
    "stable": ("beta", "n", "samples"),
    "cusp-stable": ("n", "samples"),
    "mean-free-path": ("n", "samples"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Explicitly given fields, as a sorted tuple of (key, value) pairs."""

    items: tuple

    @property
    def data(self):
        return dict(self.items)

    @property
    def experiment(self):
        return self.data["experiment"]

    def get(self, key, default=None):
        d = self.data
        if key in d:
            return d[key]
        return DEFAULTS.get(key, default)

    def __getitem__(self, key):
        v = self.get(key)
        if v is None:
            raise ConfigurationError(f"missing field {key!r}")
        return v

    def table_params(self):
        return {k[len(TABLE_PREFIX):]: v for k, v in self.items if k.startswith(TABLE_PREFIX)}

    def with_values(self, **values):
        d = self.data
        d.update({k.replace("__", "."): v for k, v in values.items() if v is not None})
        return validate(d)

    def hash(self):
        """sha256 of the serialised config without execution-only keys."""
        text = serialize(self, exclude=EXECUTION_KEYS)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _format(value):
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize(config, exclude=()):
    lines = [f"{k} = {_format(v)}" for k, v in config.items if k not in exclude]
    return "\n".join(lines) + "\n"


def _parse_value(key, text):
    if key.startswith(TABLE_PREFIX):
        return _float(text)
    return FIELDS[key][0](text)


def parse_config(text):
    """Parse and validate; raises ConfigError listing every problem found."""
    problems = []
    data = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if key in data:
            problems.append(f"line {lineno}: duplicate key {key!r}")
            continue
        if key not in FIELDS and not key.startswith(TABLE_PREFIX):
            problems.append(f"line {lineno}: unknown key {key!r}")
            continue
        if not value:
            problems.append(f"line {lineno}: empty value for {key!r}")
            continue
        try:
            data[key] = _parse_value(key, value)
        except ValueError as exc:
            problems.append(f"line {lineno}: {key}: {exc}")
    try:
        config = validate(data)
    except ConfigError as exc:
        problems.extend(exc.problems)
    if problems:
        raise ConfigError(problems)
    return config


def validate(data):
    """Check field constraints and cross-field rules; returns the config."""
    problems = []
    for key, value in data.items():
        if key.startswith(TABLE_PREFIX):
            continue
        if key not in FIELDS:
            problems.append(f"unknown key {key!r}")
            continue
        _, check, constraint = FIELDS[key]
        try:
            ok = check(value)
        except TypeError:
            ok = False
        if not ok:
            msg = constraint if "∉" in constraint else f"{key} must be {constraint}"
            problems.append(f"{key} = {_format(value)}: {msg}")
    kind = data.get("experiment")
    if kind is None:
        problems.append("experiment: required")
    elif kind in KINDS:
        for key in REQUIRED[kind]:
            if key not in data:
                problems.append(f"{key}: required for experiment {kind}")
        problems += _cross_checks(kind, data)
    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(tuple(sorted(data.items())))


def _cross_checks(kind, data):
    out = []
    system = data.get("system", DEFAULTS["system"])
    if kind in BILLIARD_KINDS and system == "lsv" and kind != "hitting":
        out.append(f"system: experiment {kind} needs a billiard preset")
    if kind == "cusp-stable" and system not in ("cusp", "lsv"):
        out.append("system: cusp-stable needs the cusp preset")
    if kind in ("ldp", "max-ldp", "return-tail", "clt", "stable", "density") and system != "lsv":
        out.append(f"system: experiment {kind} runs on the lsv map")
    if kind in ("clt",) and data.get("beta", 0.0) >= 0.5:
        out.append("beta: the CLT needs beta < 1/2")
    if kind == "stable" and "beta" in data and not (0.5 < data["beta"] < 1.0):
        out.append("beta: the stable law needs beta in (1/2, 1)")
    if kind == "quenched-clt":
        lo = data.get("beta_lo", DEFAULTS["beta_lo"])
        hi = data.get("beta_hi", DEFAULTS["beta_hi"])
        if not lo < hi:
            out.append("beta_lo must be below beta_hi")
    obs = data.get("observable")
    if obs is not None:
        billiard = kind in BILLIARD_KINDS or (kind == "simulate" and system != "lsv")
        pool = BILLIARD_PRESETS if billiard else INTERVAL_PRESETS
        if obs not in pool:
            out.append(f"observable {obs!r} does not apply to experiment {kind}")
    if any(k.startswith(TABLE_PREFIX) for k in data) and system in ("lsv", "bernoulli"):
        out.append("table.* keys need a billiard system")
    return out
