"""Command-line front end: design, response, filter, simulate.

All file formats live here.  CSV files are comma-separated with a header
row, LF newlines, '#'-prefixed metadata comments, and full-precision floats
(shortest round-trip representation).  Filter artifacts are JSON documents
carrying the complete design provenance, so reloading one reproduces the
in-memory values exactly.

Configuration is a single JSON object with one section per concern
("design", "detector", "scenario", "output"); unknown keys are rejected.
Command-line flags override config values.

Exit codes: 0 success, 2 config or validation error, 3 numerical failure,
4 I/O or file-format error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import filter_design as fd
from . import noise_models as nm
from . import sim_harness as sim
from .analysis_bank import SampleSequence, convolve, run_bank
from .detector import (DB_FLOOR, DEFAULT_EPSILON, DEFAULT_GAMMA_DB,
                       HypothesisMask, build_ortho_transform, detect)
from .errors import NumericalError


class ConfigError(ValueError):
    """Bad or missing configuration value."""


class FileFormatError(Exception):
    """Malformed input file (CSV or filter artifact)."""


CONFIG_SECTIONS = {
    "design": {"preset", "M", "L", "d", "ts", "noise", "sigma_nb",
               "omega_list", "omega_c"},
    "detector": {"gamma_db", "epsilon", "foreground_keep", "background_zero",
                 "collapse_runs"},
    "scenario": {"name", "seeds", "amplitude", "gap", "colored_white_noise"},
    "output": {"dir", "format", "grid"},
}


def load_config(path: str | Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - set(CONFIG_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    for section, allowed in CONFIG_SECTIONS.items():
        block = raw.get(section, {})
        if not isinstance(block, dict):
            raise ConfigError(f"config section {section!r} must be an object")
        bad = set(block) - allowed
        if bad:
            raise ConfigError(f"unknown keys in config section {section!r}: {sorted(bad)}")
    return raw


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(path: Path, header, rows, comments=()) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_csv_column(path: Path, column: str):
    """Read one numeric column; malformed rows are reported with line numbers."""
    try:
        fh = open(path, encoding="utf-8")
    except OSError:
        raise
    with fh:
        header = None
        values = []
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = next(csv.reader([line]))
            if header is None:
                header = fields
                if column not in header:
                    raise FileFormatError(
                        f"{path}: missing required column {column!r}")
                idx = header.index(column)
                continue
            if len(fields) != len(header):
                raise FileFormatError(
                    f"{path}: line {lineno}: expected {len(header)} fields, "
                    f"got {len(fields)}")
            try:
                values.append(float(fields[idx]))
            except ValueError as exc:
                raise FileFormatError(
                    f"{path}: line {lineno}: bad value for {column!r}: "
                    f"{fields[idx]!r}") from exc
        if header is None:
            raise FileFormatError(f"{path}: empty CSV")
    return np.asarray(values)


def write_filter_file(filt: fd.DesignedFilter, path: Path) -> None:
    spec = filt.spec
    doc = {
        "label": filt.label,
        "M": spec.m, "L": spec.l, "d": spec.d, "ts": spec.ts,
        "noise": spec.noise.to_dict(),
        "h": [float(v) for v in filt.h],
        "wng": filt.wng,
        "omega_delta": filt.omega_delta,
        "condition": filt.condition,
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_filter_file(path: str | Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"filter file {path} is not valid JSON: {exc}") from exc
    for key in ("M", "L", "d", "h"):
        if key not in doc:
            raise FileFormatError(f"filter file {path} is missing key {key!r}")
    doc["h"] = np.asarray(doc["h"], dtype=float)
    return doc


def write_detection_csv(report, path: Path) -> None:
    """Serialize a detection report: one row per analyzed center sample."""
    z_db = np.maximum(report.z_db, DB_FLOOR)
    events = set(report.events.tolist())
    n = np.arange(report.offset, report.offset + len(report.z))
    rows = zip(n, report.z, z_db, (int(i) in events for i in n))
    write_csv(path, ("n", "z", "z_db", "detected"), rows,
              comments=(f"gamma_db={report.gamma_db} offset={report.offset}",))


def _require(config_value, flag_value, name: str):
    value = flag_value if flag_value is not None else config_value
    if value is None:
        raise ConfigError(f"missing required parameter {name!r}")
    return value


def _out_dir(args, config) -> Path:
    out = args.out or config.get("output", {}).get("dir") or "."
    return Path(out)


def cmd_design(args, config) -> int:
    section = config.get("design", {})
    m = int(_require(section.get("M"), args.M, "M"))
    l = int(_require(section.get("L"), args.L, "L"))
    d = int(args.d if args.d is not None else section.get("d", 0))
    ts = float(args.ts if args.ts is not None else section.get("ts", 1.0))
    preset = args.preset or section.get("preset")

    if preset:
        filt = fd.design_preset(preset, m=m, l=l, d=d, ts=ts,
                                sigma_nb=section.get("sigma_nb"),
                                omega_list=section.get("omega_list"),
                                omega_c=section.get("omega_c"))
    else:
        noise_doc = section.get("noise")
        if noise_doc is None:
            raise ConfigError("either a preset label or a design.noise model is required")
        noise = nm.NoiseModel.from_dict(noise_doc)
        filt = fd.design(fd.DesignSpec(m=m, l=l, d=d, ts=ts, noise=noise))

    out = _out_dir(args, config) / f"filter_{filt.label}.json"
    write_filter_file(filt, out)
    null = "none" if filt.omega_delta is None else f"{filt.omega_delta:.6f}"
    print(f"filter {filt.label}: M={m} L={l} d={d} "
          f"WNG={filt.wng:.6f} omega_delta={null}")
    print(f"wrote {out}")
    return 0


def cmd_response(args, config) -> int:
    doc = load_filter_file(args.filter_file)
    grid = int(args.grid if args.grid is not None else
               config.get("output", {}).get("grid", 4096))
    fmt = args.format or config.get("output", {}).get("format", "csv")
    omega, resp = fd.frequency_response(doc["h"], grid)
    mag = np.abs(resp)
    power = mag ** 2
    with np.errstate(divide="ignore"):
        db = np.maximum(20.0 * np.log10(mag), DB_FLOOR)
    out_dir = _out_dir(args, config)
    label = doc.get("label", "custom")
    if fmt == "csv":
        out = out_dir / f"response_{label}.csv"
        write_csv(out, ("omega", "magnitude", "power", "db"),
                  zip(omega, mag, power, db),
                  comments=(f"label={label} M={doc['M']} L={doc['L']} d={doc['d']}",))
    elif fmt == "json":
        out = out_dir / f"response_{label}.json"
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            json.dump({"label": label, "omega": omega.tolist(),
                       "magnitude": mag.tolist(), "power": power.tolist(),
                       "db": db.tolist()}, fh)
            fh.write("\n")
    else:
        raise ConfigError(f"unknown output format {fmt!r}")
    print(f"wrote {out}")
    return 0


def cmd_filter(args, config) -> int:
    doc = load_filter_file(args.filter_file)
    taps = doc["h"]
    if args.d is not None and args.d != doc["d"]:
        if "noise" not in doc:
            raise FileFormatError(
                "filter file carries no noise model; cannot re-derive taps")
        noise = nm.NoiseModel.from_dict(doc["noise"])
        filt = fd.design(fd.DesignSpec(m=doc["M"], l=doc["L"], d=args.d,
                                       ts=doc.get("ts", 1.0), noise=noise),
                         label=doc.get("label", "custom"))
        taps = filt.h
    x = read_csv_column(Path(args.input), "x")
    seq = SampleSequence(values=x, ts=doc.get("ts", 1.0))
    filtered = convolve(seq, taps)
    k = (len(taps) - 1) // 2
    out = _out_dir(args, config) / "filtered.csv"
    rows = zip(range(filtered.start, filtered.start + len(filtered)),
               x[filtered.start:filtered.start + len(filtered)],
               filtered.values)
    write_csv(out, ("n", "x", "y"), rows,
              comments=(f"label={doc.get('label', 'custom')} "
                        f"M={doc['M']} d={args.d if args.d is not None else doc['d']}",
                        f"group_delay={k}; y[n] estimates the window centered "
                        f"on input sample n",))
    print(f"wrote {out}")
    return 0


def _resolve_seeds(args, section) -> list[int]:
    if args.seed:
        return [int(s) for s in args.seed]
    if args.seeds is not None:
        return list(range(int(args.seeds)))
    seeds = section.get("seeds", [0])
    if isinstance(seeds, int):
        return list(range(seeds))
    return [int(s) for s in seeds]


def cmd_simulate(args, config) -> int:
    scen_cfg = config.get("scenario", {})
    det_cfg = config.get("detector", {})
    m = int(args.M if args.M is not None else 17)
    l = int(args.L if args.L is not None else 5)
    scenario = args.scenario or scen_cfg.get("name") or "all"
    scenarios = sim.SCENARIOS if scenario == "all" else (scenario,)
    for name in scenarios:
        if name not in sim.SCENARIOS:
            raise ConfigError(f"unknown scenario tag {name!r}; "
                              f"expected one of {sim.SCENARIOS} or 'all'")
    seeds = _resolve_seeds(args, scen_cfg)
    amplitude = float(scen_cfg.get("amplitude", sim.DEFAULT_AMPLITUDE))
    gap = scen_cfg.get("gap")
    gamma_db = float(args.gamma_db if args.gamma_db is not None else
                     det_cfg.get("gamma_db", DEFAULT_GAMMA_DB))
    epsilon = float(det_cfg.get("epsilon", DEFAULT_EPSILON))
    masks = HypothesisMask(
        foreground_keep=tuple(det_cfg.get("foreground_keep", (2,))),
        background_zero=tuple(det_cfg.get("background_zero", (0, 2))))
    colored_white = bool(scen_cfg.get("colored_white_noise", False))
    fmt = args.format or config.get("output", {}).get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown output format {fmt!r}")
    out_dir = _out_dir(args, config)

    labels = fd.PRESET_LABELS
    filters = {lab: fd.design_preset(lab, m=m, l=l, d=0) for lab in labels}
    transforms = {lab: build_ortho_transform(f.operators.psi,
                                             f.operators.weight.matrix)
                  for lab, f in filters.items()}
    gap_val = 3 * m if gap is None else int(gap)

    for name in scenarios:
        for seed in seeds:
            trace = sim.build_trace(name, seed, amplitude=amplitude,
                                    gap=gap_val, colored_white_noise=colored_white)
            _write_seed_outputs(out_dir, trace, filters, transforms, masks,
                                gamma_db, epsilon, m)

    result = sim.run_experiment(scenarios=scenarios, labels=labels, m=m, l=l,
                                gamma_db=gamma_db, seeds=seeds,
                                amplitude=amplitude, gap=gap_val,
                                epsilon=epsilon,
                                colored_white_noise=colored_white)
    _write_table(out_dir, result, fmt)
    for name in scenarios:
        cells = " ".join(f"{lab}={result.cells[(name, lab)].median_db:6.1f}"
                         for lab in labels)
        print(f"{name:20s} median medium-pulse peak dB: {cells}")
    return 0


def _write_seed_outputs(out_dir, trace, filters, transforms, masks,
                        gamma_db, epsilon, m) -> None:
    k = (m - 1) // 2
    n_total = len(trace.x)
    interior = np.arange(k, n_total - k)
    header = ["n", "x"] + list(trace.components)
    columns = [interior, trace.x[interior]]
    columns += [comp[interior] for comp in trace.components.values()]
    summary = {"scenario": trace.name, "seed": trace.seed,
               "amplitude": trace.amplitude, "gamma_db": gamma_db,
               "pulses": [{"kind": p.kind, "start": p.start, "stop": p.stop,
                           "sign": p.sign} for p in trace.pulses],
               "filters": {}}
    for lab, filt in filters.items():
        seq = SampleSequence(values=trace.x, ts=trace.ts)
        smoothed = convolve(seq, filt.h)
        features = run_bank(seq, filt.operators.h_matrix)
        report = detect(features, transforms[lab], masks=masks,
                        epsilon=epsilon, gamma_db=gamma_db,
                        pulse_extents=trace.extents(), half_window=k)
        z_db = np.maximum(report.z_db, DB_FLOOR)
        detected = np.zeros(len(interior), dtype=bool)
        detected[report.events - report.offset] = True
        header += [f"y_{lab}", f"zdb_{lab}", f"det_{lab}"]
        columns += [smoothed.values, z_db, detected]
        summary["filters"][lab] = {
            "events": report.events.tolist(),
            "peak_snr_db": {p.kind: v for p, v in
                            zip(trace.pulses, report.peak_snr_db)},
        }
    stem = f"{trace.name}_seed{trace.seed}"
    write_csv(out_dir / f"trace_{stem}.csv", header, zip(*columns),
              comments=(f"scenario={trace.name} seed={trace.seed} "
                        f"amplitude={trace.amplitude} gamma_db={gamma_db}",
                        f"rows are window centers; group delay {k} compensated",))
    with open(out_dir / f"detections_{stem}.json", "w", encoding="utf-8",
              newline="\n") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")


def _write_table(out_dir, result, fmt) -> None:
    table = result.table()
    rows = [[name] + [table[name][lab] for lab in result.labels]
            for name in result.scenarios]
    write_csv(out_dir / "table.csv", ["scenario"] + list(result.labels), rows,
              comments=(f"median medium-pulse peak SNR (dB) across "
                        f"{len(result.seeds)} seeds, amplitude="
                        f"{result.amplitude}, gamma_db={result.gamma_db}",))
    doc = {"amplitude": result.amplitude, "gamma_db": result.gamma_db,
           "seeds": list(result.seeds), "M": result.m, "L": result.l,
           "median_peak_db": table,
           "cells": {f"{name}/{lab}": {
               "median_db": result.cells[(name, lab)].median_db,
               "iqr_db": result.cells[(name, lab)].iqr_db,
               "detect_medium": result.cells[(name, lab)].detect_medium,
               "any_event": result.cells[(name, lab)].any_event_fraction,
               "nonquad_event": result.cells[(name, lab)].nonquad_event,
           } for name in result.scenarios for lab in result.labels}}
    with open(out_dir / "table.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgwhiten",
        description="Whitened Savitzky-Golay filter design, response "
                    "evaluation, filtering, and detection experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--out", help="output directory (default: current)")

    p_design = sub.add_parser("design", help="solve a filter design")
    common(p_design)
    p_design.add_argument("--preset", choices=fd.PRESET_LABELS)
    p_design.add_argument("--M", type=int, help="window length (odd)")
    p_design.add_argument("--L", type=int, help="number of monomial terms")
    p_design.add_argument("--d", type=int, help="derivative order (default 0)")
    p_design.add_argument("--ts", type=float, help="sampling period (default 1)")

    p_resp = sub.add_parser("response", help="tabulate a frequency response")
    common(p_resp)
    p_resp.add_argument("filter_file", help="filter artifact JSON")
    p_resp.add_argument("--grid", type=int, help="grid points on [0, pi] (default 4096)")
    p_resp.add_argument("--format", choices=("csv", "json"))

    p_filt = sub.add_parser("filter", help="run a filter over a CSV column")
    common(p_filt)
    p_filt.add_argument("filter_file", help="filter artifact JSON")
    p_filt.add_argument("--input", required=True, help="input CSV with an 'x' column")
    p_filt.add_argument("--d", type=int,
                        help="re-derive taps for this derivative order")

    p_sim = sub.add_parser("simulate", help="run detection scenarios")
    common(p_sim)
    p_sim.add_argument("--scenario", help="scenario tag or 'all'")
    p_sim.add_argument("--seed", action="append",
                       help="explicit seed (repeatable)")
    p_sim.add_argument("--seeds", type=int, help="use seeds 0..N-1")
    p_sim.add_argument("--gamma-db", dest="gamma_db", type=float,
                       help="detection threshold in dB (default 20)")
    p_sim.add_argument("--M", type=int, help="window length (default 17)")
    p_sim.add_argument("--L", type=int, help="monomial terms (default 5)")
    p_sim.add_argument("--format", choices=("csv", "json"))
    return parser


COMMANDS = {"design": cmd_design, "response": cmd_response,
            "filter": cmd_filter, "simulate": cmd_simulate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {}
    try:
        if args.config:
            config = load_config(args.config)
        return COMMANDS[args.command](args, config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except FileFormatError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
