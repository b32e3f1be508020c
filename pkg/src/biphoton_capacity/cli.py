"""Command-line entry point.

    biphoton-capacity theory  [--config PATH] [--sigma_c UM] ...
    biphoton-capacity matrix  --resolution N --basis position --alignment aligned
    biphoton-capacity simulate --resolution N --basis momentum --seed 1
    biphoton-capacity sweep   --seed 1 --out results/
    biphoton-capacity witness counts_position.csv counts_momentum.csv

Exit codes: 0 success, 2 usage/config error, 3 runtime/numerical error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import information as info
from .config import FIELDS, ConfigError, RunConfig, load_config
from .experiment import derive_seed, read_counts, run_resolution_sweep, simulate_counts
from .geometry import build_grid
from .joint import joint_matrix
from .state import Basis, fedorov_ratio, mi_continuous, mi_strong_correlation_limit, pair_covariance

EXIT_USAGE, EXIT_RUNTIME, EXIT_IO = 2, 3, 4


class CLIError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _optional_int(text: str):
    return None if text.lower() in ("none", "null", "") else int(text)


def _int_list(text: str):
    return [int(t) for t in text.replace(",", " ").split()]


_FLAG_TYPES = {
    "resolutions": _int_list,
    "roi_radius": _optional_int,
    "seed": int,
    "out": str,
    "format": str,
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=argparse.SUPPRESS, help="JSON config file")
    for name in FIELDS:
        kwargs = {"default": argparse.SUPPRESS, "type": _FLAG_TYPES.get(name, float)}
        if name == "format":
            kwargs["choices"] = ("csv", "json")
        p.add_argument(f"--{name}", **kwargs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="biphoton-capacity", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theory", help="closed-form capacity, Fedorov ratio and covariances")
    _add_config_flags(p)

    for name, text in (("matrix", "exact pixel-pair joint distribution"),
                       ("simulate", "simulated raster-scan coincidence counts")):
        p = sub.add_parser(name, help=text)
        _add_config_flags(p)
        p.add_argument("--resolution", type=int, required=True)
        p.add_argument("--basis", choices=[b.value for b in Basis], required=True)
        p.add_argument("--alignment", choices=("aligned", "misaligned"), default="aligned")

    p = sub.add_parser("sweep", help="resolution sweep plus witness sums")
    _add_config_flags(p)

    p = sub.add_parser("witness", help="entropic separability test from two count files")
    _add_config_flags(p)
    p.add_argument("counts_pos_file")
    p.add_argument("counts_mom_file")
    return parser


def _config(ns: argparse.Namespace) -> RunConfig:
    overrides = {k: v for k, v in vars(ns).items() if k in FIELDS}
    if "resolutions" in overrides:
        overrides["resolutions"] = list(overrides["resolutions"])
    if "roi_radius" in overrides and overrides["roi_radius"] is not None:
        overrides["roi_radius"] = int(overrides["roi_radius"])
    path = getattr(ns, "config", None)
    if path is not None and not Path(path).is_file():
        raise CLIError(f"cannot read config file {path}", EXIT_IO)
    return load_config(path, overrides)


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CLIError(f"cannot create output directory {out}: {exc.strerror}", EXIT_IO) from exc
    return out


def _write_rows(path: Path, rows: list[dict], columns) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: "" if row[k] is None else row[k] for k in columns})


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n")


def _require_seed(cfg: RunConfig) -> int:
    if cfg.seed is None:
        raise ConfigError("this command is randomized; give an explicit seed (config 'seed' or --seed)")
    return int(cfg.seed)


def cmd_theory(cfg: RunConfig) -> dict:
    state = cfg.state
    report = {
        "sigma_c": state.sigma_c,
        "sigma_p": state.sigma_p,
        "wavelength": state.wavelength,
        "mi_continuous": mi_continuous(state),
        "mi_strong_correlation_limit": mi_strong_correlation_limit(state),
        "fedorov_ratio": fedorov_ratio(state),
        "bases": {},
    }
    for basis in Basis:
        cov = pair_covariance(state, basis)
        report["bases"][basis.value] = {
            "var_a": cov.var_a, "var_b": cov.var_b, "cov_ab": cov.cov_ab, "rho": cov.rho,
            "sigma_marginal": cov.sigma_marginal,
            "grid_extent": cfg.extent(basis),
            "detector_extent_um": cfg.detector_extent(basis),
        }
    print(f"mi_continuous     {report['mi_continuous']:.4f} bits/photon")
    print(f"strong-corr limit {report['mi_strong_correlation_limit']:.4f} bits/photon")
    print(f"fedorov_ratio     {report['fedorov_ratio']:.4f}")
    for name, b in report["bases"].items():
        print(f"{name:<9} rho {b['rho']:+.7f}  sigma_marginal {b['sigma_marginal']:.6g}  "
              f"grid extent {b['grid_extent']:.6g}  detector extent {b['detector_extent_um']:.6g} um")
    if cfg.out is not None:
        out = _out_dir(cfg)
        if cfg.format == "json":
            _write_json(out / "theory.json", report)
        else:
            rows = [{"basis": k, **v} for k, v in report["bases"].items()]
            for row in rows:
                row.update(mi_continuous=report["mi_continuous"], fedorov_ratio=report["fedorov_ratio"])
            _write_rows(out / "theory.csv", rows, list(rows[0]))
    return report


def _grids(cfg: RunConfig, n: int, basis: Basis, alignment: str):
    extent = cfg.extent(basis)
    offset = cfg.misalignment if alignment == "misaligned" else 0.0
    return build_grid(n, extent, (0.0, 0.0), basis), build_grid(n, extent, (offset, offset), basis)


def cmd_matrix(cfg: RunConfig, resolution: int, basis: str, alignment: str) -> dict:
    basis = Basis.parse(basis)
    if resolution < 1:
        raise ConfigError("resolution must be >= 1")
    grid_a, grid_b = _grids(cfg, resolution, basis, alignment)
    joint = joint_matrix(cfg.state, grid_a, grid_b)
    h_a, h_b = info.shannon_entropy(joint.marginal_a), info.shannon_entropy(joint.marginal_b)
    h_ab = info.shannon_entropy(joint.probs)
    summary = {
        "n_per_axis": resolution, "basis": basis.value, "alignment": alignment,
        "mi": info.mutual_information(joint), "h_a": h_a, "h_b": h_b, "h_ab": h_ab,
        "h_a_given_b": h_ab - h_b, "h_b_given_a": h_ab - h_a,
        "captured_fraction": joint.captured_fraction, "pitch": grid_a.pitch,
        "ceiling": info.max_detectable_mi(grid_a.n_pixels),
    }
    out = _out_dir(cfg)
    stem = f"matrix_{basis.value}_{resolution}_{alignment}"
    path = out / f"{stem}.{cfg.format}"
    try:
        if cfg.format == "json":
            joint.write_json(path)
            _write_json(out / f"{stem}_summary.json", summary)
        else:
            joint.write_csv(path)
            _write_rows(out / f"{stem}_summary.csv", [summary], list(summary))
    except OSError as exc:
        raise CLIError(f"cannot write {path}: {exc.strerror}", EXIT_IO) from exc
    print(f"wrote {path}")
    print(f"mi {summary['mi']:.4f} bits  H(A) {h_a:.4f}  H(B) {h_b:.4f}  H(A,B) {h_ab:.4f}  "
          f"captured_fraction {joint.captured_fraction:.4f}")
    return summary


def cmd_simulate(cfg: RunConfig, resolution: int, basis: str, alignment: str) -> dict:
    seed = _require_seed(cfg)
    basis = Basis.parse(basis)
    grid_a, grid_b = _grids(cfg, resolution, basis, alignment)
    joint = joint_matrix(cfg.state, grid_a, grid_b)
    counts = simulate_counts(joint, cfg.pair_rate, cfg.dwell, cfg.accidental_rate, cfg.roi_radius,
                             seed=derive_seed(seed, resolution, basis.value, alignment))
    est = info.estimate_mi(counts)
    out = _out_dir(cfg)
    path = out / f"counts_{basis.value}_{resolution}_{alignment}.{cfg.format}"
    try:
        (counts.write_json if cfg.format == "json" else counts.write_csv)(path)
    except OSError as exc:
        raise CLIError(f"cannot write {path}: {exc.strerror}", EXIT_IO) from exc
    print(f"wrote {path}")
    print(f"total {counts.total}  mi {est.value:.4f} +/- {est.uncertainty:.4f} bits  scan_time {counts.scan_time:.0f} s")
    return {"path": str(path), "total": counts.total, **est.to_dict()}


def cmd_sweep(cfg: RunConfig) -> dict:
    seed = _require_seed(cfg)
    result = run_resolution_sweep(cfg.state, cfg.resolutions, tuple(Basis), cfg.scan, cfg.misalignment,
                                  cfg.capture_fraction, seed, extents={b: cfg.extent(b) for b in Basis})
    out = _out_dir(cfg)
    if cfg.format == "json":
        _write_json(out / "sweep.json", result.to_dict())
    else:
        _write_rows(out / "sweep.csv", result.sweep_rows(), result.SWEEP_COLUMNS)
        _write_rows(out / "witness.csv", result.witness_rows(), result.WITNESS_COLUMNS)
    for row in result.sweep_rows():
        print(f"n={row['n']:>3} {row['basis']:<9} {row['alignment']:<10} mi {row['mi']:.4f} +/- {row['sigma']:.4f}"
              f"  theory [{row['theory_bottom']:.4f}, {row['theory_top']:.4f}]  ceiling {row['ceiling']:.4f}")
    for row in result.witness_rows():
        print(f"n={row['n']:>3} H({row['direction']})_P + H({row['direction']})_M = {row['sum']:.4f} +/- "
              f"{row['sigma']:.4f}  (theory {row['theory_sum']:.4f}, bound {row['bound']:.4f}, "
              f"violated {row['violated']})")
    return result.to_dict()


def cmd_witness(cfg: RunConfig, counts_pos_file: str, counts_mom_file: str) -> dict:
    loaded = []
    for path in (counts_pos_file, counts_mom_file):
        try:
            loaded.append(read_counts(path))
        except OSError as exc:
            raise CLIError(f"cannot read {path}: {exc.strerror}", EXIT_IO) from exc
        except (ValueError, KeyError, IndexError, StopIteration, json.JSONDecodeError) as exc:
            raise CLIError(f"cannot parse {path}: {exc}", EXIT_IO) from exc
    pos, mom = loaded
    if pos.counts.shape != mom.counts.shape:
        raise CLIError(f"arm dimensions differ: {pos.counts.shape} vs {mom.counts.shape}", EXIT_RUNTIME)
    results = {}
    for direction in info.Direction:
        w = info.separability_sum(pos, mom, direction)
        results[direction.value] = w.to_dict()
        sov = "n/a" if w.sigmas_of_violation is None else f"{w.sigmas_of_violation:.4f}"
        print(f"H({direction.value})_P + H({direction.value})_M = {w.sum:.4f} +/- {w.sigma:.4f}  "
              f"bound {w.bound:.4f}  violated {w.violated}  sigmas_of_violation {sov}")
    if cfg.out is not None:
        out = _out_dir(cfg)
        if cfg.format == "json":
            _write_json(out / "witness.json", results)
        else:
            rows = list(results.values())
            _write_rows(out / "witness.csv", rows, list(rows[0]))
    return results


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = _config(ns)
        if ns.command == "theory":
            cmd_theory(cfg)
        elif ns.command == "matrix":
            cmd_matrix(cfg, ns.resolution, ns.basis, ns.alignment)
        elif ns.command == "simulate":
            cmd_simulate(cfg, ns.resolution, ns.basis, ns.alignment)
        elif ns.command == "sweep":
            cmd_sweep(cfg)
        elif ns.command == "witness":
            cmd_witness(cfg, ns.counts_pos_file, ns.counts_mom_file)
    except ConfigError as exc:
        print(f"{parser.prog}: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CLIError as exc:
        print(f"{parser.prog}: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"{parser.prog}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError) as exc:
        print(f"{parser.prog}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
