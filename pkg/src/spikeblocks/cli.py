"""Command-line surface: build, verify, simulate, fourier, report.

The master seed comes from --seed, falling back to the SPIKEBLOCKS_SEED
environment variable, then to the built-in default.  All outputs are
deterministic in (configuration, seed); reports carry no timestamps, so two
runs with the same inputs are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import fourier, mc, regimes
from .bits import BitTape, sample_seeds
from .config import BuildResult, ConfigError, build_from_config
from .master import (CapExceeded, DeskCaps, Manifest, manifest_from_text,
                     manifest_to_text)
from .mcstats import wilson_interval
from .report import all_pass, render_report, rows_to_csv
from .suites import (RunConfig, desk_hitset, stagefail_manifest,
                     structural_manifest, suite_bits, suite_block,
                     suite_fourier, suite_independence, suite_master,
                     suite_regimes, suite_spike, suite_trial, verify_all)

DEFAULT_SEED = 20260810
ENV_SEED = "SPIKEBLOCKS_SEED"


def _seed_from(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(ENV_SEED)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"field '{ENV_SEED}': not an integer: {env!r}")
    return DEFAULT_SEED


def _parse_caps(text: str | None) -> DeskCaps | None:
    if text is None:
        return None
    base = DeskCaps()
    values = {}
    for part in text.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise ConfigError(f"field '--caps': expected name=value, got {part!r}")
        name, val = part.split("=", 1)
        name = name.strip()
        if name not in ("trials", "layers", "stages", "exponents"):
            raise ConfigError(f"field '--caps': unknown cap {name!r}")
        values[name] = int(val)
    return DeskCaps(
        max_trials=values.get("trials", base.max_trials),
        max_layers=values.get("layers", base.max_layers),
        max_stages=values.get("stages", base.max_stages),
        max_exponents=values.get("exponents", base.max_exponents),
    )


def _load_any_manifest(path: str):
    text = Path(path).read_text()
    head = json.loads(text)
    fmt = head.get("format", "")
    if fmt == regimes.HITSET_FORMAT:
        return "bounded", regimes.hitset_from_text(text)
    return "master", manifest_from_text(text)


def cmd_build(args) -> int:
    text = Path(args.config).read_text()
    result: BuildResult = build_from_config(text, seed_override=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if result.kind == "bounded":
        out.write_text(regimes.hitset_to_text(result.manifest))
    else:
        out.write_text(manifest_to_text(result.manifest))
    print(f"built {result.kind} manifest -> {out}")
    for rep in result.extras.get("feasibility", []):
        flags = ", ".join(f"{c.name}={'ok' if c.holds else 'unmet'}"
                          for c in rep.conditions)
        print(f"  stage {rep.k}: lam={rep.lam} T={rep.T}"
              f"{' (capped)' if rep.trials_capped else ''}; {flags}")
    for res in result.extras.get("stages", []):
        print(f"  stage {res.k}: B={float(res.B):.4g} lam={float(res.lam):.4g} "
              f"ratio={res.ratio:.3f} (target {res.k})")
    return 0


def _verify_rows(args, rc: RunConfig):
    if args.manifest is None:
        return verify_all(rc)
    kind, manifest = _load_any_manifest(args.manifest)
    rows = []
    rows += suite_bits(rc)
    rows += suite_spike(rc)
    rows += suite_block(rc)
    rows += suite_trial(rc)
    if kind == "bounded":
        from .suites import hitset_mc_rows

        rows += hitset_mc_rows(manifest, rc)
        rows += suite_regimes(rc)
        return rows, {"manifest": manifest}
    fail_m = manifest if any(r.T > 1 for r in manifest.stages) else stagefail_manifest(rc.seed)
    rows += suite_master(manifest, rc, fail_manifest=fail_m)
    rows += suite_independence(manifest, desk_hitset(rc), rc)
    rows += suite_fourier(manifest, rc)
    rows += suite_regimes(rc)
    return rows, {"manifest": manifest}


def cmd_verify(args) -> int:
    rc = RunConfig(seed=_seed_from(args))
    if args.caps is not None:
        rc = RunConfig(seed=rc.seed, caps=_parse_caps(args.caps))
    if args.tolerance is not None:
        if args.tolerance <= 0:
            raise ConfigError("field '--tolerance': must be positive")
    if args.samples is not None:
        if args.samples < 10 ** 3:
            raise ConfigError("field '--samples': statistical runs need >= 1e3")
        factor = args.samples / RunConfig().samples_large
        rc = rc.scaled(factor)
    if args.quick:
        rc = rc.scaled(0.2)
    rows, artifacts = _verify_rows(args, rc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(rows_to_csv(rows))
    (out / "report.txt").write_text(render_report(rows))
    ok = all_pass(rows)
    print(render_report(rows))
    print(f"report written to {out}/report.csv")
    return 0 if ok else 1


def cmd_simulate(args) -> int:
    seed = _seed_from(args)
    if args.samples < 1:
        raise ConfigError("field '--samples': need at least one sample")
    kind, manifest = _load_any_manifest(args.manifest)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n = args.samples
    if kind == "bounded":
        lines = ["# spikeblocks-hits-v1", "sample,k,t,hit"]
        seeds = sample_seeds(seed, n)
        from . import engine

        fams = [(s.k, t, s.trial_family(t))
                for s in manifest.stages for t in range(1, s.T + 1)]
        counts = engine.scan_family_counts(seeds, [f for _, _, f in fams])
        for i in range(n):
            for j, (k, t, _) in enumerate(fams):
                lines.append(f"{i},{k},{t},{int(counts[i, j] > 0)}")
        (out / "hits.csv").write_text("\n".join(lines) + "\n")
        print(f"wrote {out}/hits.csv")
        return 0
    from . import engine
    from .trials import central_family

    seeds = sample_seeds(seed, n)
    fams = [(rec.k, t, central_family(rec.block, rec.trial(t)))
            for rec, t in manifest.trials_in_order()]
    counts = engine.scan_family_counts(seeds, [f for _, _, f in fams])
    lines = ["# spikeblocks-goodevents-v1", "sample,k,t,good"]
    for i in range(n):
        for j, (k, t, _) in enumerate(fams):
            lines.append(f"{i},{k},{t},{int(counts[i, j] > 0)}")
    (out / "good_events.csv").write_text("\n".join(lines) + "\n")

    lines = ["# spikeblocks-averages-v1", "sample,k,t,N,average,bound"]
    from .master import average_at

    mu = manifest.mu
    for j, (k, t, _) in enumerate(fams):
        hits = np.flatnonzero(counts[:, j] > 0)[: args.limit]
        N = manifest.endpoint(k, t)
        B = manifest.stage(k).config.B
        for i in hits:
            tape = BitTape(int(seeds[i]))
            avg = average_at(manifest, tape, N)
            lines.append(f"{int(i)},{k},{t},{N},{avg!r},{B - mu!r}")
    (out / "averages.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote {out}/good_events.csv and {out}/averages.csv")
    return 0


def cmd_fourier(args) -> int:
    kind, manifest = _load_any_manifest(args.manifest)
    if kind != "master":
        raise ConfigError("field '--manifest': tail profiles need a spike manifest")
    cutoffs: list = []
    if args.grid:
        try:
            lo, hi, step = (int(x) for x in args.grid.split(":"))
        except ValueError:
            raise ConfigError("field '--grid': expected lo:hi:step in log2 units")
        cutoffs = [("log2", e) for e in range(lo, hi + 1, step)]
    else:
        cutoffs = [1, 4]
        for rec in manifest.stages:
            cutoffs += [("log2", rec.E), ("log2", rec.E + 8)]
        cutoffs.append(("log2", manifest.stages[-1].E + 32))
    prof = fourier.tail_profile(manifest, cutoffs)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(prof.to_csv())
    print(f"wrote {out}")
    return 0


def cmd_report(args) -> int:
    rows_seen = 0
    failures = 0
    lines = []
    for d in args.inputs:
        path = Path(d) / "report.csv" if Path(d).is_dir() else Path(d)
        text = path.read_text()
        for line in text.splitlines():
            if line.startswith("#") or line.startswith("claim,"):
                continue
            rows_seen += 1
            cells = line.split(",")
            if len(cells) >= 6 and cells[5] == "FAIL":
                failures += 1
                lines.append(f"FAIL {cells[0]} ({path})")
    summary = [f"aggregated {rows_seen} checks from {len(args.inputs)} inputs",
               f"failures: {failures}"] + lines
    text = "\n".join(summary) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")
    return 0 if failures == 0 else 1


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="spikeblocks",
        description="build and verify staged dyadic spike-block constructions")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="regime config -> manifest file")
    b.add_argument("--config", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--seed", type=int, default=None)
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="manifest -> full property-suite report")
    v.add_argument("--manifest", default=None)
    v.add_argument("--samples", type=int, default=None)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--out", required=True)
    v.add_argument("--caps", default=None)
    v.add_argument("--tolerance", type=float, default=None)
    v.add_argument("--quick", action="store_true")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="manifest + samples -> event/average CSVs")
    s.add_argument("--manifest", required=True)
    s.add_argument("--samples", type=int, required=True)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--limit", type=int, default=20)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fourier", help="manifest + cutoff grid -> tail profile CSV")
    f.add_argument("--manifest", required=True)
    f.add_argument("--grid", default=None)
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_fourier)

    r = sub.add_parser("report", help="aggregate report CSVs -> summary")
    r.add_argument("--inputs", nargs="+", required=True)
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CapExceeded, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
