"""Flat ``key = value`` run configuration.

One assignment per line, ``#`` starts a comment, blank lines are ignored.
Overrides given as ``key=value`` strings are applied after the file.
Validation collects every problem before failing, so a single diagnostic
lists all of them.
"""

import math
from dataclasses import dataclass, field

from .detection import ChannelConfig
from .errors import ConfigError, DomainError
from .optimizer import VARIANTS
from .source import SourceConfig

_FLOAT = float


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _variants(text):
    items = tuple(v.strip() for v in text.split(",") if v.strip())
    bad = [v for v in items if v not in VARIANTS]
    if bad or not items:
        raise ValueError(f"variants must be a comma list drawn from {VARIANTS}")
    return items


def _int(text):
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


SOURCE_KEYS = {"mu": _FLOAT, "t": _FLOAT, "lambda_threshold": _FLOAT, "omega": _FLOAT}
CHANNEL_KEYS = {
    "alpha": _FLOAT,
    "distance": _FLOAT,
    "eta_B": _FLOAT,
    "epsilon_B": _FLOAT,
    "q_eff": _FLOAT,
    "f_ec": _FLOAT,
}
OPTION_KEYS = {
    "d_start": _FLOAT,
    "d_stop": _FLOAT,
    "d_step": _FLOAT,
    "variants": _variants,
    "optimize_lambda": _bool,
    "grid_mu_t": _int,
    "grid_omega": _int,
    "max_iter": _int,
    "seed": _int,
    "n_samples": _int,
    "shards": _int,
    "workers": _int,
    "method": str,
}
KEYS = {**SOURCE_KEYS, **CHANNEL_KEYS, **OPTION_KEYS}

DEFAULTS = {
    "mu": 17.5,
    "t": 0.01,
    "omega": 0.393,
    "alpha": 0.2,
    "distance": 100.0,
    "eta_B": 0.045,
    "epsilon_B": 3.2e-7,
    "q_eff": 0.5,
    "f_ec": 1.22,
    "d_start": 0.0,
    "d_stop": 200.0,
    "d_step": 5.0,
    "variants": ("passive2",),
    "optimize_lambda": False,
    "grid_mu_t": 40,
    "grid_omega": 40,
    "max_iter": 500,
    "seed": 20240917,
    "n_samples": 1_000_000,
    "shards": 1,
    "workers": 1,
    "method": "gauss",
}


@dataclass(frozen=True)
class RunConfig:
    source: SourceConfig
    channel: ChannelConfig
    options: dict = field(default_factory=dict)

    def distance_grid(self):
        o = self.options
        start, stop, step = o["d_start"], o["d_stop"], o["d_step"]
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + k * step for k in range(n)]


def parse_lines(lines, origin="<config>"):
    """Return ``(values, problems)`` from ``key = value`` lines."""
    values, problems = {}, []
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"{origin}:{no}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, text = (s.strip() for s in line.split("=", 1))
        values[key] = (text, f"{origin}:{no}")
    return values, problems


def load(path=None, overrides=()):
    """Read, merge and validate a configuration; raise ConfigError listing every problem."""
    raw, problems = {}, []
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            vals, probs = parse_lines(fh, str(path))
        raw.update(vals)
        problems += probs
    for item in overrides:
        if "=" not in item:
            problems.append(f"--set {item!r}: expected key=value")
            continue
        key, text = (s.strip() for s in item.split("=", 1))
        raw[key] = (text, "--set")
    return build(raw, problems)


def build(raw, problems=None):
    problems = list(problems or [])
    values = dict(DEFAULTS)
    for key, (text, where) in raw.items():
        if key not in KEYS:
            problems.append(f"{where}: unknown key {key!r}")
            continue
        try:
            values[key] = KEYS[key](text)
        except ValueError as exc:
            problems.append(f"{where}: {key}: {exc}")
    if "lambda_threshold" not in values:
        values["lambda_threshold"] = 2.0 * values["mu"] * (1.0 - values["t"])
    for key in ("d_start", "d_stop", "d_step"):
        if not math.isfinite(values[key]):
            problems.append(f"{key} must be finite")
    if values["d_start"] < 0:
        problems.append(f"d_start must be >= 0 (got {values['d_start']})")
    if values["d_stop"] < values["d_start"]:
        problems.append("d_stop must be >= d_start")
    if not values["d_step"] > 0:
        problems.append(f"d_step must be > 0 (got {values['d_step']})")
    if values["n_samples"] < 1:
        problems.append(f"n_samples must be >= 1 (got {values['n_samples']})")
    if not 0 <= values["seed"] < 2**64:
        problems.append("seed must be a 64-bit unsigned integer")
    for key in ("shards", "workers"):
        if values[key] < 1:
            problems.append(f"{key} must be >= 1 (got {values[key]})")
    for key in ("grid_mu_t", "grid_omega"):
        if values[key] < 2:
            problems.append(f"{key} must be >= 2 (got {values[key]})")
    if values["method"] not in ("gauss", "adaptive"):
        problems.append(f"method must be 'gauss' or 'adaptive' (got {values['method']!r})")

    src = ch = None
    try:
        src = SourceConfig(**{k: values[k] for k in SOURCE_KEYS})
    except (DomainError, TypeError) as exc:
        problems += str(exc).split("; ")
    try:
        ch = ChannelConfig(**{k: values[k] for k in CHANNEL_KEYS})
    except (DomainError, TypeError) as exc:
        problems += str(exc).split("; ")
    if problems:
        raise ConfigError(problems)
    return RunConfig(src, ch, {k: values[k] for k in OPTION_KEYS})
