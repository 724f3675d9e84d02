"""Run configuration: parsing, validation and serialization.

A run config is one TOML file (JSON with the same structure is accepted):

.. code-block:: toml

    [scenario]
    kind = "binary-nonstationary"   # or "fixed", "epoch"
    n_op = 8
    n1 = [1, 2, 3, 4, 5, 6, 7, 8]   # integer or list: the N_1 values swept
    wsize = [1, 2, 3, 4, 5, 6, 7, 8]
    horizon = 1000
    # epoch_len = 100                # epoch kind only
    # intervals = [[0.0, 0.4], ...]  # epoch kind only, one [lo, hi] per operator
    # operators = [[0.5, 1.0], ...]  # fixed kind only, one [p, g_max] per operator

    [protocol]
    policies = ["OR", "IM", "GR"]
    reps = 20
    pool = 80
    top = 20
    # seed = 0                       # falls back to $NONSTAT_AOS_SEED, then 0
    threads = 1

    [output]
    directory = "results"
    formats = ["csv", "json"]

    [policies.EGR]                   # one optional table per policy
    eps = 0.05

Unknown sections and keys are rejected.  Every error message carries the
line of the offending key when it can be located in the source text.
"""
from __future__ import annotations

import json
import os
import re
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

from .island import ALPHA_INERTIA, ALPHA_REWARD, CREDIT_MAX, CREDIT_MEAN
from .policies import MEAN, RECENCY
from .roster import DEFAULT_PARAMS, TABLE_ORDER, canonical_name, make_policy
from .scenario import (BINARY, EPOCH, FIXED, KINDS, ScenarioConfig, binary_scenario,
                       default_epoch_intervals, epoch_scenario, fixed_scenario)

SEED_ENV = "NONSTAT_AOS_SEED"
FORMATS = ("csv", "json")
DEFAULT_CONFIG = "default_config.toml"

_SECTIONS = {
    "scenario": {"kind", "n_op", "n1", "wsize", "horizon", "epoch_len", "intervals", "operators"},
    "protocol": {"policies", "reps", "pool", "top", "seed", "threads"},
    "output": {"directory", "formats"},
    "policies": None,  # one sub-table per policy
}


def _unit(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and 0.0 <= v <= 1.0


def _nonneg(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and v >= 0.0


def _positive(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0.0


def _count(v):
    return isinstance(v, int) and not isinstance(v, bool) and v >= 1


# documented range of every policy parameter: (check, description)
PARAM_RANGES = {
    "alpha": (_unit, "a number in [0, 1]"),
    "eps": (_unit, "a number in [0, 1]"),
    "p_min": (_unit, "a number in [0, 1/n_op]"),
    "beta": (_unit, "a number in [0, 1]"),
    "scale": (_positive, "a number > 0"),
    "gamma": (_nonneg, "a number >= 0"),
    "delta": (_nonneg, "a number >= 0"),
    "psize": (_count, "an integer >= 1"),
    "utility": (lambda v: v in (RECENCY, MEAN), f"{RECENCY!r} or {MEAN!r}"),
    "credit": (lambda v: v in (CREDIT_MAX, CREDIT_MEAN), f"{CREDIT_MAX!r} or {CREDIT_MEAN!r}"),
    "alpha_role": (lambda v: v in (ALPHA_REWARD, ALPHA_INERTIA),
                   f"{ALPHA_REWARD!r} or {ALPHA_INERTIA!r}"),
}


class ConfigError(ValueError):
    """Invalid configuration; ``diagnostics`` holds ``(line or None, message)`` pairs."""

    def __init__(self, diagnostics, source: str = "<config>"):
        self.diagnostics = list(diagnostics)
        self.source = source
        super().__init__("\n".join(self.lines()))

    def lines(self) -> list[str]:
        return [f"{self.source}:{line}: {msg}" if line else f"{self.source}: {msg}"
                for line, msg in self.diagnostics]


@dataclass
class ScenarioBlock:
    kind: str = BINARY
    n_op: int = 8
    n1: list[int] = field(default_factory=lambda: list(range(1, 9)))
    wsize: list[int] = field(default_factory=lambda: list(range(1, 9)))
    horizon: int = 1000
    epoch_len: int | None = None
    intervals: list[list[float]] | None = None
    operators: list[list[float]] | None = None


@dataclass
class ProtocolBlock:
    policies: list[str] = field(default_factory=lambda: list(TABLE_ORDER))
    reps: int = 20
    pool: int = 80
    top: int = 20
    seed: int | None = None
    threads: int = 1


@dataclass
class OutputBlock:
    directory: str = "results"
    formats: list[str] = field(default_factory=lambda: list(FORMATS))


@dataclass
class RunConfig:
    scenario: ScenarioBlock = field(default_factory=ScenarioBlock)
    protocol: ProtocolBlock = field(default_factory=ProtocolBlock)
    output: OutputBlock = field(default_factory=OutputBlock)
    # explicit per-policy overrides, keyed by canonical policy name
    policy_params: dict[str, dict] = field(default_factory=dict)

    # -- derived views ---------------------------------------------------------

    def resolved_seed(self, environ=None) -> int:
        """The config seed, else ``$NONSTAT_AOS_SEED``, else 0."""
        if self.protocol.seed is not None:
            return self.protocol.seed
        env = (os.environ if environ is None else environ).get(SEED_ENV)
        if env is None or env == "":
            return 0
        try:
            seed = int(env)
        except ValueError:
            raise ConfigError([(None, f"${SEED_ENV}={env!r} is not an integer")]) from None
        if seed < 0:
            raise ConfigError([(None, f"${SEED_ENV} must be >= 0, got {seed}")])
        return seed

    def params_for(self, name: str) -> dict:
        key = canonical_name(name)
        return {**DEFAULT_PARAMS[key], **self.policy_params.get(key, {})}

    def policy(self, name: str):
        return make_policy(name, **self.params_for(name))

    def scenarios(self) -> list[ScenarioConfig]:
        """Every scenario cell of the sweep, wsize-major."""
        s = self.scenario
        if s.kind == BINARY:
            return [binary_scenario(s.n_op, n1, w, s.horizon) for w in s.wsize for n1 in s.n1]
        if s.kind == FIXED:
            return [fixed_scenario([tuple(o) for o in s.operators], s.horizon, w)
                    for w in s.wsize]
        intervals = s.intervals or default_epoch_intervals(s.n_op)
        return [epoch_scenario(s.n_op, s.epoch_len, s.horizon, intervals, w) for w in s.wsize]

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        sc = {"kind": self.scenario.kind, "n_op": self.scenario.n_op,
              "n1": list(self.scenario.n1), "wsize": list(self.scenario.wsize),
              "horizon": self.scenario.horizon}
        for key in ("epoch_len", "intervals", "operators"):
            value = getattr(self.scenario, key)
            if value is not None:
                sc[key] = value
        proto = {"policies": list(self.protocol.policies), "reps": self.protocol.reps,
                 "pool": self.protocol.pool, "top": self.protocol.top,
                 "threads": self.protocol.threads}
        if self.protocol.seed is not None:
            proto["seed"] = self.protocol.seed
        out = {"scenario": sc, "protocol": proto,
               "output": {"directory": self.output.directory,
                          "formats": list(self.output.formats)}}
        if self.policy_params:
            out["policies"] = {k: dict(v) for k, v in self.policy_params.items()}
        return out

    def dumps(self, fmt: str = "toml") -> str:
        if fmt == "toml":
            return tomli_w.dumps(self.to_dict())
        if fmt == "json":
            return json.dumps(self.to_dict(), indent=2) + "\n"
        raise ValueError(f"unknown config format {fmt!r}")


# -- parsing ---------------------------------------------------------------------

def _locate(text: str | None, section: str | None, key: str | None) -> int | None:
    """Best-effort line number of ``key`` inside ``[section]`` (TOML or JSON text)."""
    if not text:
        return None
    lines = text.splitlines()
    if text.lstrip().startswith("{"):  # JSON: first quoted key after the section key
        start = 0
        if section:
            for part in section.split("."):
                for i in range(start, len(lines)):
                    if f'"{part}"' in lines[i]:
                        start = i
                        break
        if key is None:
            return start + 1
        for i in range(start, len(lines)):
            if re.search(rf'"{re.escape(key)}"\s*:', lines[i]):
                return i + 1
        return None
    current = None
    header = re.compile(r"^\s*\[+\s*([^\]]+?)\s*\]+")
    for i, line in enumerate(lines):
        m = header.match(line)
        if m:
            current = m.group(1).replace('"', "").replace(" ", "")
            if key is None and current == section:
                return i + 1
            continue
        if key is not None and current == section and \
                re.match(rf"^\s*\"?{re.escape(key)}\"?\s*=", line):
            return i + 1
    return None


class _Checker:
    def __init__(self, text):
        self.text = text
        self.diags: list[tuple[int | None, str]] = []

    def error(self, section, key, msg):
        self.diags.append((_locate(self.text, section, key), msg))


def _int_list(chk, section, key, value, minimum):
    vals = value if isinstance(value, list) else [value]
    if not vals or not all(isinstance(v, int) and not isinstance(v, bool) and v >= minimum
                           for v in vals):
        chk.error(section, key, f"[{section}] {key} must be an integer >= {minimum} "
                                f"or a non-empty list of them, got {value!r}")
        return None
    return list(vals)


def _int(chk, section, key, value, minimum):
    if not (isinstance(value, int) and not isinstance(value, bool) and value >= minimum):
        chk.error(section, key, f"[{section}] {key} must be an integer >= {minimum}, got {value!r}")
        return None
    return value


def _pairs(chk, section, key, value, n_op, what):
    ok = isinstance(value, list) and all(
        isinstance(p, list) and len(p) == 2 and all(_unit(x) for x in p) for p in value)
    if not ok:
        chk.error(section, key, f"[{section}] {key} must be a list of [{what}] pairs in [0, 1]")
        return None
    if len(value) != n_op:
        chk.error(section, key, f"[{section}] {key} needs {n_op} entries (n_op), got {len(value)}")
        return None
    return [[float(x) for x in p] for p in value]


def from_dict(data: dict, text: str | None = None, source: str = "<config>") -> RunConfig:
    """Validate a parsed config mapping; raises :class:`ConfigError` listing every problem."""
    chk = _Checker(text)
    cfg = RunConfig()
    if not isinstance(data, dict):
        raise ConfigError([(None, "config must be a table/object at top level")], source)
    for sec in data:
        if sec not in _SECTIONS:
            chk.error(None, sec, f"unknown section [{sec}]; valid: {', '.join(_SECTIONS)}")
            chk.diags[-1] = (_locate(text, sec, None) or chk.diags[-1][0], chk.diags[-1][1])
    for sec, keys in _SECTIONS.items():
        block = data.get(sec, {})
        if not isinstance(block, dict):
            chk.error(None, sec, f"[{sec}] must be a table")
            continue
        if keys is not None:
            for k in block:
                if k not in keys:
                    chk.error(sec, k, f"unknown key {k!r} in [{sec}]; valid: {', '.join(sorted(keys))}")

    sc = data.get("scenario", {}) if isinstance(data.get("scenario", {}), dict) else {}
    s = cfg.scenario
    if "kind" in sc:
        if sc["kind"] in KINDS:
            s.kind = sc["kind"]
        else:
            chk.error("scenario", "kind", f"[scenario] kind must be one of {', '.join(KINDS)}, "
                                          f"got {sc['kind']!r}")
    if "n_op" in sc:
        s.n_op = _int(chk, "scenario", "n_op", sc["n_op"], 1) or s.n_op
    if "horizon" in sc:
        h = _int(chk, "scenario", "horizon", sc["horizon"], 0)
        s.horizon = s.horizon if h is None else h
    if "wsize" in sc:
        s.wsize = _int_list(chk, "scenario", "wsize", sc["wsize"], 1) or s.wsize
    if "n1" in sc:
        s.n1 = _int_list(chk, "scenario", "n1", sc["n1"], 0) or s.n1
    if s.kind == BINARY:
        bad = [n for n in s.n1 if n > s.n_op]
        if bad:
            chk.error("scenario", "n1", f"[scenario] n1 values {bad} exceed n_op={s.n_op}")
    if "epoch_len" in sc:
        s.epoch_len = _int(chk, "scenario", "epoch_len", sc["epoch_len"], 1)
    if "intervals" in sc:
        s.intervals = _pairs(chk, "scenario", "intervals", sc["intervals"], s.n_op, "lo, hi")
        if s.intervals and any(lo > hi for lo, hi in s.intervals):
            chk.error("scenario", "intervals", "[scenario] intervals need lo <= hi")
    if "operators" in sc:
        s.operators = _pairs(chk, "scenario", "operators", sc["operators"], s.n_op, "p, g_max")
    if s.kind == EPOCH and s.epoch_len is None:
        chk.error("scenario", "kind", "[scenario] epoch kind needs epoch_len")
    if s.kind == FIXED and s.operators is None:
        chk.error("scenario", "kind", "[scenario] fixed kind needs operators = [[p, g_max], ...]")

    pr = data.get("protocol", {}) if isinstance(data.get("protocol", {}), dict) else {}
    p = cfg.protocol
    if "policies" in pr:
        names = pr["policies"] if isinstance(pr["policies"], list) else [pr["policies"]]
        canon = []
        for n in names:
            try:
                canon.append(canonical_name(str(n)))
            except ValueError as exc:
                chk.error("protocol", "policies", f"[protocol] {exc}")
        if not names:
            chk.error("protocol", "policies", "[protocol] policies must not be empty")
        p.policies = canon or p.policies
    for key, minimum in (("reps", 1), ("pool", 1), ("top", 1), ("threads", 1), ("seed", 0)):
        if key in pr:
            v = _int(chk, "protocol", key, pr[key], minimum)
            if v is not None:
                setattr(p, key, v)
    if p.top > p.pool:
        chk.error("protocol", "top", f"[protocol] top={p.top} exceeds pool={p.pool}")

    out = data.get("output", {}) if isinstance(data.get("output", {}), dict) else {}
    if "directory" in out:
        if isinstance(out["directory"], str) and out["directory"]:
            cfg.output.directory = out["directory"]
        else:
            chk.error("output", "directory", "[output] directory must be a non-empty string")
    if "formats" in out:
        fm = out["formats"] if isinstance(out["formats"], list) else [out["formats"]]
        if not fm or any(f not in FORMATS for f in fm):
            chk.error("output", "formats", f"[output] formats must be a subset of {list(FORMATS)}, "
                                           f"got {out['formats']!r}")
        else:
            cfg.output.formats = list(dict.fromkeys(fm))

    pols = data.get("policies", {}) if isinstance(data.get("policies", {}), dict) else {}
    for raw, params in pols.items():
        section = f"policies.{raw}"
        try:
            name = canonical_name(raw)
        except ValueError as exc:
            chk.diags.append((_locate(text, section, None), f"[{section}] {exc}"))
            continue
        if not isinstance(params, dict):
            chk.error("policies", raw, f"[{section}] must be a table")
            continue
        clean = {}
        for k, v in params.items():
            if k not in DEFAULT_PARAMS[name]:
                chk.error(section, k, f"unknown key {k!r} in [{section}]; valid: "
                                      f"{', '.join(sorted(DEFAULT_PARAMS[name])) or '(none)'}")
                continue
            ok, desc = PARAM_RANGES[k]
            if not ok(v):
                chk.error(section, k, f"[{section}] {k} must be {desc}, got {v!r}")
                continue
            if k == "p_min" and v * s.n_op > 1.0:
                chk.error(section, k, f"[{section}] p_min={v} exceeds 1/n_op for n_op={s.n_op}")
                continue
            clean[k] = float(v) if k in ("alpha", "eps", "p_min", "beta", "scale",
                                          "gamma", "delta") else v
        try:
            make_policy(name, **clean)
        except ValueError as exc:  # cross-parameter rules the range table cannot express
            chk.error("policies", raw, f"[{section}] {exc}")
            continue
        if clean:
            cfg.policy_params[name] = clean
    if "IM" in p.policies:
        psize = cfg.params_for("IM")["psize"]
        if p.top > psize:
            chk.error("policies.IM", "psize", f"IM psize={psize} is smaller than top={p.top}")
        if psize < s.n_op:
            chk.error("policies.IM", "psize", f"IM psize={psize} cannot populate n_op={s.n_op} islands")

    if chk.diags:
        raise ConfigError(chk.diags, source)
    return cfg


def loads(text: str, fmt: str | None = None, source: str = "<config>") -> RunConfig:
    """Parse TOML (or JSON when ``fmt == "json"`` or the text is an object literal)."""
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "toml"
    try:
        data = json.loads(text) if fmt == "json" else tomllib.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([(exc.lineno, f"JSON syntax error: {exc.msg}")], source) from None
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError([(int(m.group(1)) if m else None, f"TOML syntax error: {exc}")],
                          source) from None
    return from_dict(data, text, source)


def load(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([(None, f"cannot read config: {exc.strerror}")], str(path)) from None
    fmt = "json" if path.suffix.lower() == ".json" else None
    return loads(text, fmt, str(path))


def default_text() -> str:
    return resources.files(__package__).joinpath(DEFAULT_CONFIG).read_text()


def load_default() -> RunConfig:
    return loads(default_text(), "toml", DEFAULT_CONFIG)


def dump(cfg: RunConfig, path, fmt: str | None = None) -> None:
    path = Path(path)
    fmt = fmt or ("json" if path.suffix.lower() == ".json" else "toml")
    path.write_text(cfg.dumps(fmt))


def apply_overrides(cfg: RunConfig, **flags: Any) -> RunConfig:
    """Command-line overrides; ``None`` values leave the config untouched."""
    diags = []
    if flags.get("policy") is not None:
        names = [n for n in re.split(r"[,\s]+", flags["policy"]) if n]
        try:
            cfg.protocol.policies = [canonical_name(n) for n in names]
        except ValueError as exc:
            diags.append((None, f"--policy: {exc}"))
    for flag, attr in (("nop", "n_op"), ("horizon", "horizon")):
        if flags.get(flag) is not None:
            setattr(cfg.scenario, attr, flags[flag])
    for flag in ("n1", "wsize"):
        if flags.get(flag) is not None:
            v = flags[flag]
            setattr(cfg.scenario, flag, list(v) if isinstance(v, (list, tuple)) else [v])
    for flag in ("seed", "threads"):
        if flags.get(flag) is not None:
            setattr(cfg.protocol, flag, flags[flag])
    if flags.get("out") is not None:
        cfg.output.directory = str(flags["out"])
    if flags.get("format") is not None:
        cfg.output.formats = [flags["format"]]
    if diags:
        raise ConfigError(diags, "<command line>")
    # re-validate the merged result through the same checks as a file
    return from_dict(cfg.to_dict(), None, "<command line>")
