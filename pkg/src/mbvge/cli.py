"""Command-line front end: sampling, density grids, fitting, dependence
summaries, and simulation studies, all reproducible from a seed.

Every command writes a manifest (<output>.manifest.json) holding the tool
version and the fully resolved configuration; `mbvge replay <manifest>`
re-executes it and produces bit-identical data files.  Exit codes: 0 on
success, 1 for runtime/numeric failures, 2 for usage/validation errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bvge import BVGEParams, REGION_LABELS
from .dependence import dependence_summary
from .em import EMConfig, ModelInadequacyError, em_fit
from .mixture import (
    PARAM_NAMES,
    MixtureParams,
    mix_logdensity,
    mix_sample_arrays,
    params_to_vector,
    vector_to_params,
)
from .simstudy import (
    StudyConfig,
    format_report_table,
    run_study,
    summary_dict,
    write_study_csv,
    write_summary_json,
)

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    """Invalid parameters or malformed input; maps to exit code 2."""


def _fmt(value: float) -> str:
    # shortest round-trip decimal keeps reruns bit-identical
    return repr(float(value))


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


# ---------------------------------------------------------------------------
# parameter handling


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--params", type=Path, default=None,
                        help="JSON file with the nine parameters")
    for name in PARAM_NAMES:
        parser.add_argument(f"--{name}", type=float, default=None)


def _resolve_params(args) -> dict[str, float]:
    values: dict[str, float] = {}
    if args.params is not None:
        try:
            raw = json.loads(Path(args.params).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read parameter file {args.params}: {exc}")
        unknown = set(raw) - set(PARAM_NAMES)
        if unknown:
            raise UsageError(f"unknown parameter name(s) in {args.params}: {sorted(unknown)}")
        values.update({k: float(v) for k, v in raw.items()})
    for name in PARAM_NAMES:
        flag = getattr(args, name)
        if flag is not None:
            values[name] = flag  # flags win on conflict
    missing = [n for n in PARAM_NAMES if n not in values]
    if missing:
        raise UsageError(f"missing parameter(s): {', '.join(missing)}")
    return values


def _build_mixture(values: dict[str, float]) -> MixtureParams:
    p = values["p"]
    if not 0.0 < p < 1.0:
        raise UsageError("p must lie in (0,1)")
    try:
        return MixtureParams(
            p,
            BVGEParams(values["a1"], values["a2"], values["a3"], values["l1"]),
            BVGEParams(values["b1"], values["b2"], values["b3"], values["l2"]),
        )
    except ValueError as exc:
        raise UsageError(str(exc))


def _em_config(args) -> EMConfig:
    try:
        return EMConfig(
            rel_tol=args.rel_tol,
            max_iter=args.max_iter,
            fp_tol=args.fp_tol,
            fp_max_iter=args.fp_max_iter,
            fp_damping=args.fp_damping,
            init=args.init,
            tie_tol=args.tie_tol,
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc))


# ---------------------------------------------------------------------------
# manifests


def _write_manifest(out_path: Path, command: str, config: dict) -> None:
    manifest = {
        "tool": "mbvge",
        "version": __version__,
        "command": command,
        "config": config,
        "created": _utc_now(),
    }
    path = Path(str(out_path) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _read_csv_pairs(path: Path) -> np.ndarray:
    """Read x1,x2 columns (extra columns ignored); line numbers in errors."""
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}")
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise UsageError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if "x1" in header and "x2" in header:
            i1, i2 = header.index("x1"), header.index("x2")
            start_line = 2
            rows = reader
        else:
            raise UsageError(f"{path}: header must name columns x1,x2")
        pairs = []
        for line_no, row in enumerate(rows, start=start_line):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) <= max(i1, i2):
                raise UsageError(f"line {line_no}: expected 2 numeric fields")
            try:
                pairs.append((float(row[i1]), float(row[i2])))
            except ValueError:
                raise UsageError(f"line {line_no}: expected 2 numeric fields")
    if not pairs:
        raise UsageError(f"{path}: no data rows")
    return np.asarray(pairs, dtype=float)


# ---------------------------------------------------------------------------
# commands


def cmd_sample(config: dict) -> None:
    params = _build_mixture(config["params"])
    n = int(config["n"])
    if n < 1:
        raise UsageError("n must be >= 1")
    rng = np.random.default_rng(config["seed"])
    x1, x2, codes, labels = mix_sample_arrays(params, n, rng)
    out = Path(config["out"])
    with open(out, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["x1", "x2", "region", "label"])
        for a, b, c, z in zip(x1, x2, codes, labels):
            writer.writerow([_fmt(a), _fmt(b), REGION_LABELS[int(c)], int(z)])
    _write_manifest(out, "sample", config)


def cmd_density_grid(config: dict) -> None:
    params = _build_mixture(config["params"])
    xmin, xmax, steps = config["xmin"], config["xmax"], int(config["steps"])
    if xmin < 0:
        raise UsageError("xmin must be >= 0")
    if xmax <= xmin:
        raise UsageError("xmax must exceed xmin")
    if steps < 2:
        raise UsageError("steps must be >= 2")
    axis = np.linspace(xmin, xmax, steps)
    out = Path(config["out"])
    with open(out, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["x1", "x2", "density"])
        for a in axis:
            for b in axis:
                if a <= 0 or b <= 0:
                    dens = 0.0
                elif a == b:
                    # planar channel has no canonical diagonal value; emit the
                    # mean of the two one-sided limits (transpose-invariant)
                    lo = np.exp(mix_logdensity(params, a, b, 1))
                    up = np.exp(mix_logdensity(params, a, b, 2))
                    dens = 0.5 * (lo + up)
                else:
                    code = 1 if a < b else 2
                    dens = np.exp(mix_logdensity(params, a, b, code))
                writer.writerow([_fmt(a), _fmt(b), _fmt(dens)])
    diag_out = out.with_name(out.stem + ".diag" + out.suffix)
    with open(diag_out, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["x", "diag_density"])
        for a in axis:
            dens = 0.0 if a <= 0 else np.exp(mix_logdensity(params, a, a, 0))
            writer.writerow([_fmt(a), _fmt(dens)])
    _write_manifest(out, "density-grid", config)


def cmd_fit(config: dict) -> None:
    pairs = _read_csv_pairs(Path(config["data"]))
    cfg = EMConfig(**config["em"])
    fit = em_fit(pairs, cfg)
    out = Path(config["out"])
    estimates = dict(zip(PARAM_NAMES, (float(v) for v in params_to_vector(fit.params))))
    payload = {
        "estimates": estimates,
        "loglik_trace": [float(v) for v in fit.loglik_trace],
        "iterations": fit.iterations,
        "converged": fit.converged,
        "stop_reason": fit.stop_reason,
        "notes": list(fit.notes),
        "manifest": {
            "tool": "mbvge",
            "version": __version__,
            "command": "fit",
            "config": config,
        },
    }
    out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _write_manifest(out, "fit", config)


def cmd_simstudy(config: dict) -> None:
    study_raw = config["study"]
    try:
        truth = vector_to_params([study_raw["truth"][k] for k in PARAM_NAMES])
        em_cfg = EMConfig(**study_raw.get("em", {}))
        study = StudyConfig(
            truth=truth,
            n=int(study_raw["n"]),
            replications=int(study_raw["replications"]),
            em=em_cfg,
            seed=int(study_raw.get("seed", 0)),
            label_resolution=study_raw.get("label_resolution", "match_truth"),
            include_capped=bool(study_raw.get("include_capped", True)),
            workers=study_raw.get("workers"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid study config: {exc}")
    report = run_study(study)
    out_dir = Path(config["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "replications.csv"
    json_path = out_dir / "summary.json"
    write_study_csv(report, csv_path)
    write_summary_json(report, json_path, study)
    _write_manifest(csv_path, "simstudy", config)
    print(format_report_table(report))


def cmd_dependence(config: dict) -> None:
    params = _build_mixture(config["params"])
    summary = dependence_summary(params)
    out = Path(config["out"])
    payload = summary.as_dict()
    payload["manifest"] = {
        "tool": "mbvge",
        "version": __version__,
        "command": "dependence",
        "config": config,
    }
    out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _write_manifest(out, "dependence", config)


_COMMANDS = {
    "sample": cmd_sample,
    "density-grid": cmd_density_grid,
    "fit": cmd_fit,
    "simstudy": cmd_simstudy,
    "dependence": cmd_dependence,
}


def cmd_replay(manifest_path: Path) -> None:
    try:
        manifest = json.loads(Path(manifest_path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read manifest {manifest_path}: {exc}")
    command = manifest.get("command")
    if command not in _COMMANDS:
        raise UsageError(f"manifest names unknown command {command!r}")
    _COMMANDS[command](manifest["config"])


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mbvge",
        description="Two-component bivariate generalized exponential mixture tools",
    )
    parser.add_argument("--version", action="version", version=f"mbvge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="draw labelled pairs to CSV")
    _add_param_flags(p_sample)
    p_sample.add_argument("-n", type=int, required=True, help="number of draws")
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("--out", type=Path, required=True)

    p_grid = sub.add_parser("density-grid", help="export density over a grid")
    _add_param_flags(p_grid)
    p_grid.add_argument("--xmin", type=float, default=0.0)
    p_grid.add_argument("--xmax", type=float, required=True)
    p_grid.add_argument("--steps", type=int, required=True)
    p_grid.add_argument("--out", type=Path, required=True)

    p_fit = sub.add_parser("fit", help="fit the mixture to CSV data by EM")
    p_fit.add_argument("--data", type=Path, required=True)
    p_fit.add_argument("--out", type=Path, required=True)
    p_fit.add_argument("--rel-tol", type=float, default=1e-8, dest="rel_tol")
    p_fit.add_argument("--max-iter", type=int, default=5000, dest="max_iter")
    p_fit.add_argument("--fp-tol", type=float, default=1e-9, dest="fp_tol")
    p_fit.add_argument("--fp-max-iter", type=int, default=200, dest="fp_max_iter")
    p_fit.add_argument("--fp-damping", type=float, default=1.0, dest="fp_damping")
    p_fit.add_argument("--init", choices=("random", "moment"), default="random")
    p_fit.add_argument("--tie-tol", type=float, default=0.0, dest="tie_tol")
    p_fit.add_argument("--seed", type=int, default=0)

    p_study = sub.add_parser("simstudy", help="run a replication study")
    p_study.add_argument("--config", type=Path, required=True,
                         help="JSON study configuration")
    p_study.add_argument("--out-dir", type=Path, required=True, dest="out_dir")

    p_dep = sub.add_parser("dependence", help="dependence summary to JSON")
    _add_param_flags(p_dep)
    p_dep.add_argument("--out", type=Path, required=True)

    p_replay = sub.add_parser("replay", help="re-run a command from its manifest")
    p_replay.add_argument("manifest", type=Path)

    return parser


def _dispatch(args) -> None:
    if args.command == "sample":
        config = {
            "params": _resolve_params(args),
            "n": args.n,
            "seed": args.seed,
            "out": str(args.out),
        }
        cmd_sample(config)
    elif args.command == "density-grid":
        config = {
            "params": _resolve_params(args),
            "xmin": args.xmin,
            "xmax": args.xmax,
            "steps": args.steps,
            "out": str(args.out),
        }
        cmd_density_grid(config)
    elif args.command == "fit":
        config = {
            "data": str(args.data),
            "out": str(args.out),
            "em": {
                "rel_tol": args.rel_tol,
                "max_iter": args.max_iter,
                "fp_tol": args.fp_tol,
                "fp_max_iter": args.fp_max_iter,
                "fp_damping": args.fp_damping,
                "init": args.init,
                "tie_tol": args.tie_tol,
                "seed": args.seed,
            },
        }
        _em_config_check(config["em"])
        cmd_fit(config)
    elif args.command == "simstudy":
        try:
            study_raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read study config {args.config}: {exc}")
        cmd_simstudy({"study": study_raw, "out_dir": str(args.out_dir)})
    elif args.command == "dependence":
        config = {"params": _resolve_params(args), "out": str(args.out)}
        cmd_dependence(config)
    elif args.command == "replay":
        cmd_replay(args.manifest)


def _em_config_check(em: dict) -> None:
    try:
        EMConfig(**em)
    except ValueError as exc:
        raise UsageError(str(exc))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _dispatch(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ModelInadequacyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime/numeric failure
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
