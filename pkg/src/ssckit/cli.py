"""Command-line front end.

Subcommands: ``region`` (trade-off corner, optional boundary sweep),
``threshold`` (per-threshold table plus ordering verdicts), ``verify``
(numerical identity checks), ``simulate`` (random-binning codec run),
and ``example`` (reproduction bundle of the worked examples).  Delimited
outputs get a rendered figure written alongside unless ``--no-plot``.

Exit codes: 0 success, 2 validation error, 3 numeric or resource error,
4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .access import AccessStructure
from .discrete import DiscreteSourceSpec, binary_symmetric_spec
from .errors import (
    InfeasibleDistortionError,
    InvalidParameterError,
    NumericError,
    ResourceLimitError,
    SingularModelError,
    StructuralError,
)
from .gaussian import SourceModel
from .oracle import run_verification
from .region import compute_region, sweep_tradeoff
from .simulate import (
    DESK_EPSILONS,
    Epsilons,
    Rates,
    build_codebooks,
    rates_with_margin,
    simulate,
)
from .threshold import five_user_example_model, threshold_report

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_VERIFICATION = 4

VALIDATION_ERRORS = (InvalidParameterError, StructuralError,
                     json.JSONDecodeError, OSError, KeyError)
NUMERIC_ERRORS = (SingularModelError, InfeasibleDistortionError,
                  ResourceLimitError, NumericError)


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _digest(*objects) -> str:
    canonical = json.dumps(objects, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _manifest(args, digest: str, seed=None) -> dict:
    return {
        "command": " ".join(sys.argv) if sys.argv else "",
        "config_digest": digest,
        "seed": seed,
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }


def _round_floats(obj, sig: int):
    if isinstance(obj, float):
        return float(f"{obj:.{sig}g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v, sig) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v, sig) for v in obj]
    return obj


def _emit_json(payload: dict, args) -> None:
    if getattr(args, "precision", "6") != "full":
        payload = _round_floats(payload, 6)
    print(json.dumps(payload, indent=2))


def _write_csv(path: Path, header, records) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(records)


def _out_dir(args) -> Path:
    out = Path(getattr(args, "out", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- subcommands ------------------------------------------------------------

def cmd_region(args) -> int:
    model = SourceModel.from_dict(_load_json(args.model))
    structure = AccessStructure.from_dict(_load_json(args.structure))
    result = compute_region(model, structure, args.distortion)
    payload = {
        "manifest": _manifest(args, _digest(model.to_dict(), structure.to_dict(),
                                            args.distortion)),
        "region": result.to_dict(),
    }
    if args.sweep:
        tag, lo, hi, steps = _parse_sweep(args.sweep)
        grid = np.linspace(lo, hi, steps)
        rows = sweep_tradeoff(model.sigma_x2, args.distortion, result.tr_b, grid)
        out = _out_dir(args)
        csv_path = out / "region_sweep.csv"
        _write_csv(csv_path, ("tr_a", "r_min", "delta_min", "case_tag"), rows)
        payload["sweep_csv"] = str(csv_path)
        if not args.no_plot:
            from .plotting import save_sweep_figure
            fig_path = out / "region_sweep.png"
            save_sweep_figure(rows, fig_path, model.sigma_x2,
                              args.distortion, result.tr_b)
            payload["sweep_figure"] = str(fig_path)
    _emit_json(payload, args)
    return EXIT_OK


def _parse_sweep(text: str):
    parts = text.split(":")
    if len(parts) != 4 or parts[0] != "tr_a":
        raise InvalidParameterError("--sweep expects tr_a:min:max:steps")
    lo, hi, steps = float(parts[1]), float(parts[2]), int(parts[3])
    if steps < 1 or hi < lo or lo < 0:
        raise InvalidParameterError("--sweep range is malformed")
    return parts[0], lo, hi, steps


def _parse_t_range(text: str | None, num_users: int):
    if text is None:
        return None
    lo, _, hi = text.partition(":")
    lo = int(lo)
    hi = int(hi) if hi else lo
    if not (1 <= lo <= hi <= num_users):
        raise InvalidParameterError(
            f"--t-range {text} outside [1, {num_users}]")
    return range(lo, hi + 1)


def cmd_threshold(args) -> int:
    model = SourceModel.from_dict(_load_json(args.model))
    t_range = _parse_t_range(args.t_range, model.num_users)
    report = threshold_report(model, args.distortion, t_range)
    out = _out_dir(args)
    rows_path = out / "threshold_rows.csv"
    verdicts_path = out / "threshold_verdicts.csv"
    _write_csv(rows_path, report.ROW_HEADER, report.row_records())
    _write_csv(verdicts_path, report.VERDICT_HEADER, report.verdict_records())
    payload = {
        "manifest": _manifest(args, _digest(model.to_dict(), args.distortion,
                                            args.t_range)),
        "rows": [dict(zip(report.ROW_HEADER, rec))
                 for rec in report.row_records()],
        "verdicts_consistent": all(v.consistent for v in report.verdicts
                                   if v.applicable),
        "rows_csv": str(rows_path),
        "verdicts_csv": str(verdicts_path),
    }
    if not args.no_plot:
        from .plotting import save_threshold_figure
        fig_path = out / "threshold_rows.png"
        save_threshold_figure(report.rows, fig_path)
        payload["figure"] = str(fig_path)
    _emit_json(payload, args)
    return EXIT_OK


def cmd_verify(args) -> int:
    run = run_verification(seed=args.seed, trials=args.trials)
    payload = {
        "manifest": _manifest(args, _digest(args.seed, args.trials),
                              seed=args.seed),
        **run.to_dict(),
    }
    if args.out:
        out = _out_dir(args)
        with open(out / "verify_report.json", "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
    _emit_json(payload, args)
    return EXIT_OK if run.all_passed else EXIT_VERIFICATION


def cmd_simulate(args) -> int:
    if args.spec == "builtin:binary-symmetric":
        data = builtin_binary_bundle()
    else:
        data = _load_json(args.spec)
    spec = DiscreteSourceSpec.from_dict(data)
    if args.structure:
        structure = AccessStructure.from_dict(_load_json(args.structure))
    elif "structure" in data:
        structure = AccessStructure.from_dict(data["structure"])
    else:
        raise InvalidParameterError(
            "no access structure: pass --structure or embed one in the spec file")
    defaults = data.get("sim_defaults", {})
    n = args.n if args.n is not None else int(defaults.get("n", 12))
    eps_data = defaults.get("epsilons")
    epsilons = (Epsilons(**eps_data) if eps_data else Epsilons())
    margin = args.margin if args.margin is not None else float(
        defaults.get("margin", 0.10))
    bin_fraction = args.bin_fraction if args.bin_fraction is not None else float(
        defaults.get("bin_fraction", 1.0))
    if args.rates:
        values = [float(v) for v in args.rates.split(",")]
        if len(values) != 4:
            raise InvalidParameterError(
                "--rates expects coarse,coarse_bin,fine,fine_bin")
        rates = Rates(*values)
    else:
        rates = rates_with_margin(spec, structure, margin=margin,
                                  bin_fraction=bin_fraction)
    cb = build_codebooks(spec, n, rates, epsilons, args.seed)
    result = simulate(spec, structure, cb, args.trials, args.seed,
                      leakage_samples=args.samples)
    payload = {
        "manifest": _manifest(args, _digest(data, n, args.trials, args.seed),
                              seed=args.seed),
        **result.to_dict(),
    }
    if args.out:
        out = _out_dir(args)
        with open(out / "sim_result.json", "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
        if not args.no_plot:
            from .plotting import save_sim_figure
            save_sim_figure(result, out / "sim_result.png")
            payload["figure"] = str(out / "sim_result.png")
    _emit_json(payload, args)
    return EXIT_OK


def builtin_binary_bundle() -> dict:
    """Bundled desk-scale demonstration: two users, unanimity required.

    Wide typicality windows and binning disabled keep block length 12
    workable; see the README for why these are the honest desk-scale
    choices.
    """
    spec = binary_symmetric_spec(num_users=2, y_flip=0.08, v_flip=0.25,
                                 u_equals_v=True)
    data = spec.to_dict()
    data["structure"] = {"threshold": {"L": 2, "t": 2}}
    data["sim_defaults"] = {
        "n": 12,
        "epsilons": {"source": DESK_EPSILONS.source,
                     "encode": DESK_EPSILONS.encode,
                     "decode": DESK_EPSILONS.decode},
        "margin": 0.10,
        "bin_fraction": 0.0,
    }
    return data


def cmd_example(args) -> int:
    out = _out_dir(args)
    written = []

    model = five_user_example_model()
    with open(out / "example_model.json", "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, indent=2)
    written.append("example_model.json")

    report = threshold_report(model, 0.1, t_range=range(2, 6))
    _write_csv(out / "example_fig3.csv", report.ROW_HEADER, report.row_records())
    written.append("example_fig3.csv")

    sigma_x2, d, tr_b = 2.0, 0.1, 3.5
    grid = np.linspace(0.0, 1.0 / d - 1.0 / sigma_x2, 96)
    rows = sweep_tradeoff(sigma_x2, d, tr_b, grid)
    _write_csv(out / "example_fig2.csv",
               ("tr_a", "r_min", "delta_min", "case_tag"), rows)
    written.append("example_fig2.csv")

    with open(out / "binary_spec.json", "w", encoding="utf-8") as fh:
        json.dump(builtin_binary_bundle(), fh, indent=2)
    written.append("binary_spec.json")

    if not args.no_plot:
        from .plotting import save_sweep_figure, save_threshold_figure
        save_sweep_figure(rows, out / "example_fig2.png", sigma_x2, d, tr_b)
        save_threshold_figure(report.rows, out / "example_fig3.png")
        written.extend(["example_fig2.png", "example_fig3.png"])

    payload = {
        "manifest": _manifest(args, _digest("example")),
        "written": [str(out / name) for name in written],
    }
    _emit_json(payload, args)
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssckit",
        description="Rate-leakage regions and binning simulations for "
                    "secure lossy source coding under access structures.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory for files")
    common.add_argument("--precision", choices=("6", "full"), default="6")
    common.add_argument("--no-plot", action="store_true",
                        help="skip figure rendering")

    p = sub.add_parser("region", parents=[common],
                       help="trade-off corner for a model and structure")
    p.add_argument("--model", required=True)
    p.add_argument("--structure", required=True)
    p.add_argument("--distortion", type=float, required=True)
    p.add_argument("--sweep", help="boundary sweep as tr_a:min:max:steps")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("threshold", parents=[common],
                       help="per-threshold table and ordering verdicts")
    p.add_argument("--model", required=True)
    p.add_argument("--distortion", type=float, required=True)
    p.add_argument("--t-range", dest="t_range",
                   help="thresholds to include, as lo:hi")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("verify", parents=[common],
                       help="run the numerical identity checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100_000)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", parents=[common],
                       help="run the random-binning codec")
    p.add_argument("--spec", required=True,
                   help="spec JSON path or builtin:binary-symmetric")
    p.add_argument("--structure")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--samples", type=int, default=2000,
                   help="leakage estimator sample count")
    p.add_argument("--margin", type=float, default=None)
    p.add_argument("--bin-fraction", dest="bin_fraction", type=float,
                   default=None)
    p.add_argument("--rates", help="explicit coarse,coarse_bin,fine,fine_bin")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("example", parents=[common],
                       help="write the reproduction bundle")
    p.set_defaults(func=cmd_example)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if "SSC_THREADS" in os.environ:
        try:
            int(os.environ["SSC_THREADS"])
        except ValueError:
            print("SSC_THREADS must be an integer", file=sys.stderr)
            return EXIT_VALIDATION
    try:
        return args.func(args)
    except NUMERIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
