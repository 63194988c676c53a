"""Flat ``key = value`` run configuration files.

Example::

    # headline breaking run
    family = A
    amplitude = 1
    k = 0
    n = 1025
    t_end = 0.5

Blank lines and ``#`` comments are ignored. Unknown keys are rejected.
"""
from __future__ import annotations

from dataclasses import asdict
from pathlib import Path

from .dynamics import SimConfig
from .errors import ConfigError
from .initial_data import FAMILIES, InitialDataSpec

REQUIRED = ("family", "k", "n", "t_end")

# key -> (SimConfig field, parser)
_REAL = float


def _int(s: str) -> int:
    v = float(s)
    if v != int(v):
        raise ValueError(s)
    return int(v)


_KEYS = {
    "family": ("family", str),
    "amplitude": ("amplitude", _REAL),
    "samples_file": ("samples_file", str),
    "k": ("k", _REAL),
    "n": ("n", _int),
    "t_end": ("t_end", _REAL),
    "cfl": ("cfl", _REAL),
    "dt_max": ("dt_max", _REAL),
    "dt_min": ("dt_min", _REAL),
    "blowup_threshold": ("blowup_threshold", _REAL),
    "M": ("blowup_threshold", _REAL),
    "rhs_form": ("rhs_form", str),
    "record_stride": ("record_stride", _int),
    "x0": ("x0", _REAL),
    "min_spike_width": ("min_spike_width", _int),
    "out_dir": ("out_dir", str),
}

_TYPE_NAMES = {_REAL: "a real number", _int: "an integer", str: "a string"}


def parse_config_text(text: str, base_dir: Path | None = None, source: str = "<config>") -> SimConfig:
    values: dict = {}
    seen_at: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        name, conv = _KEYS[key]
        if name in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first set on line {seen_at[name]})")
        try:
            values[name] = conv(val)
        except ValueError:
            raise ConfigError(
                f"{source}:{lineno}: {key} must be {_TYPE_NAMES[conv]}, got {val!r}"
            ) from None
        seen_at[name] = lineno

    for key in REQUIRED:
        if key not in values:
            raise ConfigError(f"{source}: missing required key {key!r}")

    family = values.pop("family")
    if family not in FAMILIES:
        raise ConfigError(f"{source}:{seen_at['family']}: family must be one of {FAMILIES}, got {family!r}")
    samples_file = values.pop("samples_file", None)
    samples: tuple = ()
    if family == "custom_samples":
        if samples_file is None:
            raise ConfigError(f"{source}: family custom_samples needs samples_file")
        path = Path(samples_file)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        try:
            samples = tuple(float(tok) for tok in path.read_text().replace(",", " ").split())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"{source}: cannot read samples_file {samples_file!r}: {exc}") from None
        amplitude = values.pop("amplitude", 1.0)
    else:
        if "amplitude" not in values:
            raise ConfigError(f"{source}: missing required key 'amplitude'")
        amplitude = values.pop("amplitude")

    spec = InitialDataSpec(family, amplitude, samples)
    return SimConfig(initial_data=spec, **values)


def parse_config(path) -> SimConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, base_dir=path.parent, source=str(path))


def config_echo(cfg: SimConfig) -> dict:
    """JSON-friendly view of a config (custom samples are summarized)."""
    d = asdict(cfg)
    spec = d.pop("initial_data")
    d["family"] = spec["family"]
    d["amplitude"] = spec["amplitude"]
    if spec["samples"]:
        d["n_samples"] = len(spec["samples"])
    return d
