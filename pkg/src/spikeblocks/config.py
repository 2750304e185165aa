"""Regime configuration files: a small key = value text format.

Example::

    # three-stage desk construction
    regime = master
    seed = 2026
    stages = 3
    b_floor = 1
    lambda_schedule = const(1)
    b_schedule = const(1)
    trials_schedule = const(1)
    max_trials = 4
    max_exponents = 100000

Schedules are closed-form tags: ``const(x)``, ``sqrtlog(offset)``,
``geometric(ratio, scale)``.  Numbers may be written as rationals (1/2) or
decimals.  Regimes: ``master`` (explicit schedules), ``endpoint`` (cost
search), ``lp`` (budget deflation, needs ``p``), ``bounded`` (hitting sets,
needs ``epsilon``).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from . import regimes
from .master import DeskCaps, Manifest, StageConfig, build_manifest


class ConfigError(ValueError):
    """A malformed or inconsistent configuration; the message names the field."""


def _number(text: str, field: str):
    text = text.strip()
    try:
        if "/" in text:
            return Fraction(text)
        if re.fullmatch(r"[+-]?\d+", text):
            return int(text)
        return float(text)
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"field {field!r}: bad number {text!r}") from e


_SCHEDULE_RE = re.compile(r"(?P<name>[a-z_]+)\((?P<args>[^)]*)\)")


def parse_schedule(text: str, field: str) -> Callable[[int], Fraction | float]:
    m = _SCHEDULE_RE.fullmatch(text.strip())
    if not m:
        raise ConfigError(f"field {field!r}: expected a schedule tag, got {text!r}")
    name = m.group("name")
    args = [a for a in (s.strip() for s in m.group("args").split(",")) if a]
    vals = [_number(a, field) for a in args]
    if name == "const" and len(vals) == 1:
        return lambda k: vals[0]
    if name == "sqrtlog" and len(vals) == 1:
        return lambda k: float(vals[0]) + math.sqrt(math.log(k + 2))
    if name == "geometric" and len(vals) == 2:
        ratio, scale = Fraction(vals[0]), Fraction(vals[1])
        return lambda k: scale * ratio ** k
    raise ConfigError(f"field {field!r}: unknown schedule {text!r}")


def parse_kv(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {i}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip().lower()
        if key in out:
            raise ConfigError(f"field {key!r}: duplicated")
        out[key] = value.strip()
    return out


@dataclass(frozen=True)
class BuildResult:
    kind: str
    manifest: object
    extras: dict


def _caps(kv: dict[str, str]) -> DeskCaps:
    base = DeskCaps()
    return DeskCaps(
        max_trials=int(kv.pop("max_trials", base.max_trials)),
        max_layers=int(kv.pop("max_layers", base.max_layers)),
        max_stages=int(kv.pop("max_stages", base.max_stages)),
        max_exponents=int(kv.pop("max_exponents", base.max_exponents)),
    )


def build_from_config(text: str, seed_override: int | None = None) -> BuildResult:
    kv = parse_kv(text)
    try:
        regime = kv.pop("regime")
    except KeyError:
        raise ConfigError("field 'regime': missing")
    seed = int(kv.pop("seed", 0))
    if seed_override is not None:
        seed = seed_override
    stages = int(kv.pop("stages", 3))
    b_floor = float(_number(kv.pop("b_floor", "100"), "b_floor"))
    caps = _caps(kv)

    if regime == "master":
        lam_s = parse_schedule(kv.pop("lambda_schedule", "const(1)"), "lambda_schedule")
        b_s = parse_schedule(kv.pop("b_schedule", f"const({b_floor})"), "b_schedule")
        t_s = parse_schedule(kv.pop("trials_schedule", "const(1)"), "trials_schedule")
        _reject_unknown(kv)
        cfgs = [StageConfig(lam=Fraction(lam_s(k)), B=float(b_s(k)), T=int(t_s(k)),
                            provenance="config")
                for k in range(1, stages + 1)]
        manifest = build_manifest(cfgs, b_floor=b_floor, regime="master",
                                  seed=seed, caps=caps)
        return BuildResult(kind="master", manifest=manifest, extras={})

    if regime == "endpoint":
        gamma = float(_number(kv.pop("gamma", "1"), "gamma"))
        b_tag = kv.pop("b_schedule", None)
        cfg = regimes.EndpointConfig(
            gamma=gamma, b_floor=b_floor,
            b_schedule=parse_schedule(b_tag, "b_schedule") if b_tag else None,
            shrink=Fraction(_number(kv.pop("shrink", "1/2"), "shrink")),
            caps=caps)
        _reject_unknown(kv)
        manifest, reports = regimes.build_endpoint_manifest(cfg, stages, seed=seed)
        return BuildResult(kind="endpoint", manifest=manifest,
                           extras={"feasibility": reports})

    if regime == "lp":
        try:
            p = float(_number(kv.pop("p"), "p"))
        except KeyError:
            raise ConfigError("field 'p': required for the lp regime")
        a_tag = kv.pop("a_schedule", "geometric(1/2, 1/4)")
        m = _SCHEDULE_RE.fullmatch(a_tag.strip())
        if not m or m.group("name") != "geometric":
            raise ConfigError("field 'a_schedule': lp regime needs geometric(ratio, scale)")
        ratio, scale = [Fraction(_number(a.strip(), "a_schedule"))
                        for a in m.group("args").split(",")]
        gamma_txt = kv.pop("gamma", None)
        cfg = regimes.LpConfig(
            p=p, gamma=float(_number(gamma_txt, "gamma")) if gamma_txt else None,
            b_floor=b_floor, a_ratio=ratio, a_scale=scale, caps=caps)
        _reject_unknown(kv)
        manifest, results = regimes.build_lp_manifest(cfg, stages, seed=seed)
        return BuildResult(kind="lp", manifest=manifest, extras={"stages": results})

    if regime == "bounded":
        epsilon = Fraction(_number(kv.pop("epsilon", "1/2"), "epsilon"))
        a_tag = kv.pop("a_schedule", "geometric(2, 4)")
        m = _SCHEDULE_RE.fullmatch(a_tag.strip())
        if not m or m.group("name") != "geometric":
            raise ConfigError("field 'a_schedule': bounded regime needs geometric(ratio, scale)")
        ratio, scale = [int(_number(a.strip(), "a_schedule"))
                        for a in m.group("args").split(",")]
        c_txt = kv.pop("c", None)
        cfg = regimes.BoundedConfig(
            epsilon=epsilon,
            C=float(_number(c_txt, "c")) if c_txt else float(8 / regimes.HIT_COEFF),
            A_ratio=ratio, A_scale=scale, caps=caps)
        _reject_unknown(kv)
        hm = regimes.bounded_build(cfg, stages, seed=seed)
        return BuildResult(kind="bounded", manifest=hm, extras={})

    raise ConfigError(f"field 'regime': unknown regime {regime!r}")


def _reject_unknown(kv: dict[str, str]) -> None:
    if kv:
        raise ConfigError(f"field {sorted(kv)[0]!r}: not recognized")
