"""Experiment configuration files.

The format is INI-style text read with :mod:`configparser`::

    # comments start with '#'
    [workload]
    kind = table            # uniform | table | quality
    n_hits = 10000

    [sweep]
    schemes = V1, V4, slow
    epsilons = 0.3
    cs = 0.5:5:0.5          # start:stop:step, inclusive, or a comma list
    seed = 7

    [scheme slow]
    lambda = 1, 1, 1
    gamma = 1.02, 1, 0.98
    cadence = 2

Unknown sections or keys are rejected so that typos do not silently fall back
to defaults.
"""

from __future__ import annotations

import configparser
from dataclasses import replace
from pathlib import Path
from typing import Optional

from .harness import UNWEIGHTED, ConfigError, SweepSpec
from .routing import Policy
from .weights import PRESETS, WeightScheme, preset
from .workload import GroupTableSpec, QualityDistSpec, UniformBiasSpec

WORKLOAD_KEYS = {
    "uniform": {"kind", "n_hits", "bias_low", "bias_high"},
    "table": {"kind", "n_hits", "n_workers", "baseline"},
    "quality": {"kind", "mode", "n_workers", "rates", "beta_a", "beta_b"},
}
SWEEP_KEYS = {
    "schemes", "epsilons", "cs", "policies", "replications", "seed", "max_rounds",
    "c_mode", "delta", "randomized", "n_gold", "jobs",
}
SCHEME_KEYS = {"lambda", "gamma", "cadence"}


def _floats(text: str, key: str) -> tuple[float, ...]:
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ConfigError(f"{key}: range step must be positive")
            n = int(round((stop - start) / step))
            return tuple(round(start + k * step, 10) for k in range(n + 1) if start + k * step <= stop + 1e-9)
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected numbers, got {text!r}") from None


def _names(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _number(section, key: str, kind=float):
    try:
        return kind(section[key])
    except ValueError:
        raise ConfigError(f"[{section.name}] {key}: expected {kind.__name__}, got {section[key]!r}") from None


def _check_keys(section, allowed: set[str]) -> None:
    extra = sorted(set(section) - allowed)
    if extra:
        raise ConfigError(f"[{section.name}] unknown key(s): {', '.join(extra)}")


def _workload(section):
    kind = section.get("kind", "").strip().lower()
    if kind not in WORKLOAD_KEYS:
        raise ConfigError(f"[workload] kind must be one of {sorted(WORKLOAD_KEYS)}, got {kind!r}")
    _check_keys(section, WORKLOAD_KEYS[kind])
    kw = {}
    for key in ("n_hits", "n_workers"):
        if key in section:
            kw[key] = _number(section, key, int)
    for key in ("bias_low", "bias_high", "beta_a", "beta_b"):
        if key in section:
            kw[key] = _number(section, key)
    if "baseline" in section:
        kw["baseline"] = _floats(section["baseline"], "baseline")
    if "rates" in section:
        kw["rates"] = _floats(section["rates"], "rates")
    if "mode" in section:
        kw["mode"] = section["mode"].strip().lower()
    cls = {"uniform": UniformBiasSpec, "table": GroupTableSpec, "quality": QualityDistSpec}[kind]
    try:
        cfg = cls(**kw)
        if isinstance(cfg, GroupTableSpec):
            cfg.error_matrix()
    except ValueError as e:
        raise ConfigError(f"[workload] {e}") from None
    return cfg


def _custom_schemes(parser) -> dict[str, WeightScheme]:
    out = {}
    for name in parser.sections():
        if not name.startswith("scheme "):
            continue
        sid = name[len("scheme "):].strip()
        if not sid or sid.upper() in PRESETS or sid == UNWEIGHTED:
            raise ConfigError(f"[{name}] scheme name must be non-empty and differ from presets")
        sec = parser[name]
        _check_keys(sec, SCHEME_KEYS)
        try:
            out[sid] = WeightScheme(
                _floats(sec.get("lambda", "1,1,1"), "lambda"),
                _floats(sec.get("gamma", "1,1,1"), "gamma"),
                _number(sec, "cadence", int) if "cadence" in sec else 1,
                name=sid,
            )
        except ValueError as e:
            raise ConfigError(f"[{name}] {e}") from None
    return out


def _resolve_scheme(sid: str, custom: dict[str, WeightScheme]) -> tuple[str, Optional[WeightScheme]]:
    if sid.lower() == UNWEIGHTED:
        return UNWEIGHTED, None
    if sid in custom:
        return sid, custom[sid]
    try:
        p = preset(sid)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return p.name, p


def parse_config(text: str, source: str = "<config>") -> SweepSpec:
    parser = configparser.ConfigParser(
        inline_comment_prefixes=("#",), comment_prefixes=("#",), interpolation=None
    )
    try:
        parser.read_string(text, source=source)
    except configparser.Error as e:
        raise ConfigError(f"{source}: {e}") from None
    for name in parser.sections():
        if name not in ("workload", "sweep") and not name.startswith("scheme "):
            raise ConfigError(f"{source}: unknown section [{name}]")
    if "workload" not in parser:
        raise ConfigError(f"{source}: missing [workload] section")

    kw: dict = {"workload": _workload(parser["workload"])}
    sweep = parser["sweep"] if "sweep" in parser else None
    custom = _custom_schemes(parser)
    if sweep is not None:
        _check_keys(sweep, SWEEP_KEYS)
        if "schemes" in sweep:
            kw["schemes"] = tuple(_resolve_scheme(s, custom) for s in _names(sweep["schemes"]))
        if "epsilons" in sweep:
            kw["epsilons"] = _floats(sweep["epsilons"], "epsilons")
        if "cs" in sweep:
            kw["cs"] = _floats(sweep["cs"], "cs")
        if "policies" in sweep:
            try:
                kw["policies"] = tuple(Policy.parse(p) for p in _names(sweep["policies"]))
            except ValueError as e:
                raise ConfigError(str(e)) from None
        for key in ("replications", "seed", "max_rounds", "n_gold", "jobs"):
            if key in sweep:
                kw[key] = _number(sweep, key, int)
        if "delta" in sweep:
            kw["delta"] = _number(sweep, "delta")
        if "c_mode" in sweep:
            kw["c_mode"] = sweep["c_mode"].strip().lower()
        if "randomized" in sweep:
            try:
                kw["randomized"] = sweep.getboolean("randomized")
            except ValueError:
                raise ConfigError(f"[sweep] randomized: expected a boolean, got {sweep['randomized']!r}") from None
    cfg = SweepSpec(**kw)
    # surface rule-parameter errors at load time rather than mid-sweep
    for eps in cfg.epsilons:
        for c in cfg.cs:
            cfg.params(eps, c)
    return cfg


def load_config(path) -> SweepSpec:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {p}: {e.strerror or e}") from None
    return parse_config(text, source=str(p))


def with_overrides(cfg: SweepSpec, **overrides) -> SweepSpec:
    """Copy of ``cfg`` with every non-None override applied."""
    changes = {k: v for k, v in overrides.items() if v is not None}
    try:
        return replace(cfg, **changes)
    except ValueError as e:
        raise ConfigError(str(e)) from None
