"""Command line front end: ``mgforge <command> ...``.

Exit codes: 0 success, 1 runtime failure (reconstruction, calibration,
verification), 2 usage or validation errors.
"""
import argparse
import datetime
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import formats as fmt
from .compiler import decompose_general, decompose_symmetric
from .errors import CalibrationError, MatchgateError, ReconstructionError, ValidationError
from .matchgate import GATE_NAMES, RELAXED_NAMES, named_gate, named_matchgate, recognize_matchgate
from .nonlocal_map import PRESETS, build_chamber_grid, fidelity_map, locate_maximum, map_csv, map_summary
from .optics import (
    PAPER_TARGETS,
    TARGET_POINT,
    ExperimentConfig,
    calibrate_to_targets,
    report_json,
    synthesize_experiment,
)
from .process import compose, noise_channel, process_fidelity, process_purity, unitary_to_chi
from .tomography import bootstrap_errors, mle_fit, simulate_counts
from .weyl import is_perfect_entangler, kak_coordinates, makhlin_invariants, nearest_named_gate

log = logging.getLogger("mgforge")


class RunFailure(RuntimeError):
    pass


def default_seed():
    raw = os.environ.get("MG_FORGE_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"MG_FORGE_SEED must be an integer, got {raw!r}") from None


def _emit(obj):
    sys.stdout.write(fmt.dumps(obj))


def _out(args, name):
    d = Path(args.output_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def _manifest(args, outputs, config_path=None):
    manifest = {
        "command": " ".join(args.command_path),
        "argv": sys.argv[1:],
        "config_path": config_path,
        "seed": args.seed,
        "output_dir": str(args.output_dir),
        "outputs": outputs,
        "tool_version": __version__,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    # one entry per command, so runs sharing an output directory keep theirs
    path = _out(args, "manifest.json")
    runs = fmt.read_json(path).get("runs", {}) if path.exists() else {}
    runs[manifest["command"]] = manifest
    fmt.write_json(path, {"runs": runs})


def _load_unitary(args):
    if getattr(args, "gate", None):
        return named_gate(args.gate)
    if getattr(args, "file", None):
        return fmt.matrix_from_json(fmt.read_json(args.file))
    raise ValidationError("give --gate NAME or --file MATRIX.json")


# ---------------------------------------------------------------- commands


def cmd_gates(args):
    if args.name is None:
        _emit({"gates": list(GATE_NAMES)})
        return 0
    out = {"name": args.name, "matrix": fmt.matrix_to_json(named_gate(args.name))}
    if args.name in RELAXED_NAMES:
        out["note"] = "relaxed matchgate: det(a) != det(b), outside the matchgate group"
    _emit(out)
    return 0


def _matchgate_source(src):
    if os.path.exists(src):
        d = fmt.read_json(src)
        if "a" in d:
            return fmt.matchgate_from_json(d)
        return recognize_matchgate(fmt.matrix_from_json(d))
    if src in RELAXED_NAMES:
        return named_matchgate(src)
    return recognize_matchgate(named_gate(src))


def cmd_decompose(args):
    m = _matchgate_source(args.source)
    if args.symmetric:
        dec = decompose_symmetric(m)
        circuit = dec.circuit()
        extra = {"theta": dec.theta, "alpha": dec.alpha, "beta": dec.beta}
    else:
        dec = decompose_general(m)
        circuit = dec.circuit
        extra = {}
    out = {"circuit": fmt.circuit_to_json(circuit), "residual": dec.residual, **extra}
    _emit(out)
    if dec.residual > args.tolerance:
        raise RunFailure(f"residual {dec.residual:.3e} exceeds tolerance {args.tolerance:.1e}")
    return 0


def cmd_kak(args):
    u = _load_unitary(args)
    c = kak_coordinates(u)
    inv = makhlin_invariants(u)
    name, dist = nearest_named_gate(c)
    _emit({
        "c": list(c),
        "makhlin": {"g1": [inv.g1.real, inv.g1.imag], "g2": inv.g2},
        "perfect_entangler": is_perfect_entangler(c, method="convex"),
        "nearest_landmark": {"name": name, "distance": dist},
    })
    return 0


def cmd_chi(args):
    x = unitary_to_chi(_load_unitary(args))
    if args.noise:
        x = compose(x, noise_channel(args.noise, args.p))
    path = _out(args, args.out)
    fmt.write_json(path, fmt.process_to_json(x))
    _manifest(args, [path.name])
    _emit({"chi": str(path), "purity": process_purity(x), "trace_norm": x.trace_norm})
    return 0


def cmd_tomo_simulate(args):
    if args.chi:
        x = fmt.process_from_json(fmt.read_json(args.chi))
    else:
        x = unitary_to_chi(named_gate(args.gate))
    data = simulate_counts(x, args.counts, args.seed, exact=args.exact)
    if args.gate:
        data.meta["gate"] = args.gate
    path = _out(args, args.out)
    fmt.write_dataset(path, data)
    _manifest(args, [path.name], args.chi)
    _emit({"dataset": str(path), "total_counts": int(data.counts.sum())})
    return 0


def cmd_tomo_reconstruct(args):
    data = fmt.read_dataset(args.dataset)
    fit = mle_fit(data)
    x = fit.process
    path = _out(args, args.out)
    fmt.write_json(path, fmt.process_to_json(x))
    out = {
        "chi": str(path),
        "purity": process_purity(x),
        "trace_norm": x.trace_norm,
        "loglik": fit.loglik,
        "converged": fit.converged,
        "tp_defect": fit.tp_defect,
    }
    ideal = args.ideal or data.meta.get("gate")
    if ideal:
        target = unitary_to_chi(named_gate(ideal))
        out["ideal"] = ideal
        out["fidelity"] = process_fidelity(x, target)
        if args.bootstrap:
            boot = bootstrap_errors(data, args.bootstrap, lambda y: process_fidelity(y, target),
                                    seed=args.seed, start=x.chi)
            out["fidelity_sigma"] = boot.std
    _manifest(args, [path.name], args.dataset)
    _emit(out)
    if not fit.converged:
        raise ReconstructionError("MLE did not converge")
    return 0


def _grid(args):
    if args.grid in PRESETS:
        return build_chamber_grid(preset=args.grid, weighting=args.weighting, seed=args.seed)
    try:
        count = int(args.grid)
    except ValueError:
        raise ValidationError(f"--grid must be one of {sorted(PRESETS)} or a point count") from None
    return build_chamber_grid(count, weighting=args.weighting, seed=args.seed)


def cmd_weylmap(args):
    x = fmt.process_from_json(fmt.read_json(args.target))
    grid = _grid(args)
    fmap = fidelity_map(x, grid, restarts=args.restarts, seed=args.seed, jobs=args.jobs, target=args.target)
    target_point = tuple(args.target_point) if args.target_point else TARGET_POINT
    best = locate_maximum(fmap, x, target_point, seed=args.seed)
    summary = map_summary(fmap, best, args.threshold)
    csv_path, summary_path = _out(args, "map.csv"), _out(args, "map_summary.json")
    csv_path.write_text(map_csv(fmap))
    fmt.write_json(summary_path, summary)
    _manifest(args, [csv_path.name, summary_path.name], args.target)
    _emit(summary)
    return 0


def _config(args):
    if args.config:
        cfg = ExperimentConfig.from_dict(fmt.read_json(args.config))
    else:
        cfg = ExperimentConfig()
    overrides = {"seed": args.seed}
    if args.counts:
        overrides["n_nominal"] = args.counts
    d = cfg.to_dict()
    d.update(overrides)
    return ExperimentConfig.from_dict(d)


def cmd_experiment_run(args):
    cfg = _config(args)
    if args.calibrate:
        cal = calibrate_to_targets()
        if not cal.success:
            raise CalibrationError(cal.message)
        d = cal.config.to_dict()
        d.update(seed=cfg.seed, n_nominal=cfg.n_nominal)
        cfg = ExperimentConfig.from_dict(d)
    grid = _grid(args)
    report, data, fmap = synthesize_experiment(cfg, grid=grid, restarts=args.restarts,
                                               resamples=args.resamples, jobs=args.jobs)
    paths = {name: _out(args, name) for name in ("dataset.jsonl", "map.csv", "report.json")}
    fmt.write_dataset(paths["dataset.jsonl"], data)
    paths["map.csv"].write_text(map_csv(fmap))
    report["dataset_path"] = paths["dataset.jsonl"].name
    report["map_path"] = paths["map.csv"].name
    paths["report.json"].write_text(report_json(report) + "\n")
    _manifest(args, list(paths), args.config)
    _emit(report)
    return 0


def cmd_experiment_calibrate(args):
    targets = {
        "raw_f": args.raw_f if args.raw_f is not None else PAPER_TARGETS["raw_f"],
        "f_max": args.f_max if args.f_max is not None else PAPER_TARGETS["f_max"],
        "purity": args.purity if args.purity is not None else PAPER_TARGETS["purity"],
    }
    base = _config(args)
    result = calibrate_to_targets(targets, base=base, tol=args.tolerance if args.tolerance_set else 0.015)
    out = {
        "config": result.config.to_dict(),
        "targets": targets,
        "achieved": result.achieved,
        "residuals": result.residuals,
        "success": result.success,
        "message": result.message,
    }
    path = _out(args, "calibration.json")
    fmt.write_json(path, out)
    _manifest(args, [path.name], args.config)
    _emit(out)
    if not result.success:
        raise CalibrationError(result.message)
    return 0


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(2)


def _common(p):
    # global flags are accepted both before and after the subcommand
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed (default $MG_FORGE_SEED or 0)")
    p.add_argument("--output-dir", default=argparse.SUPPRESS, help="directory for output files")
    p.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="worker processes for maps")
    p.add_argument("--tolerance", type=float, default=argparse.SUPPRESS,
                   help="verification tolerance (decompose residual, calibration residual)")


def build_parser():
    parser = _Parser(prog="mgforge", description="Matchgates, Weyl-chamber analysis and process tomography.")
    parser.add_argument("--version", action="version", version=f"mgforge {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    _common(parser)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gates", help="print a named gate as matrix JSON")
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_gates)

    p = sub.add_parser("decompose", help="compile a matchgate into a circuit")
    p.add_argument("source", help="matchgate JSON, 4x4 matrix JSON, or a gate name")
    p.add_argument("--symmetric", action="store_true", help="single CZ_theta circuit for G_AA")
    p.set_defaults(func=cmd_decompose)

    for name, func, help_ in (("kak", cmd_kak, "Weyl-chamber coordinates"), ("chi", cmd_chi, "process matrix of a gate")):
        p = sub.add_parser(name, help=help_)
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--gate")
        g.add_argument("--file", help="4x4 matrix JSON")
        if name == "chi":
            p.add_argument("--noise", choices=("depolarizing", "dephasing"))
            p.add_argument("--p", type=float, default=0.0)
            p.add_argument("--out", default="chi.json")
        p.set_defaults(func=func)

    tomo = sub.add_parser("tomo", help="process tomography").add_subparsers(dest="tomo_command", required=True,
                                                                           parser_class=_Parser)
    p = tomo.add_parser("simulate", help="simulate Poisson coincidence counts")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--gate")
    g.add_argument("--chi", help="process JSON")
    p.add_argument("--counts", type=int, default=10_000, help="nominal counts per setting")
    p.add_argument("--exact", action="store_true", help="use rounded expected counts")
    p.add_argument("--out", default="dataset.jsonl")
    p.set_defaults(func=cmd_tomo_simulate)
    p = tomo.add_parser("reconstruct", help="maximum-likelihood chi from a dataset")
    p.add_argument("dataset", nargs="?", default=None)
    p.add_argument("--ideal", help="gate name to compare against")
    p.add_argument("--bootstrap", type=int, default=0, help="bootstrap resamples (>= 50)")
    p.add_argument("--out", default="chi_mle.json")
    p.set_defaults(func=cmd_tomo_reconstruct)

    p = sub.add_parser("weylmap", help="locally optimised fidelity map over the chamber")
    p.add_argument("--target", required=True, help="process JSON")
    p.add_argument("--grid", default="desk", help="'desk', 'paper' or an approximate point count")
    p.add_argument("--weighting", choices=("lattice", "voronoi"), default="lattice")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--threshold", type=float, default=0.9)
    p.add_argument("--target-point", type=float, nargs=3, metavar=("C1", "C2", "C3"))
    p.set_defaults(func=cmd_weylmap)

    exp = sub.add_parser("experiment", help="simulated PPBS experiment").add_subparsers(
        dest="experiment_command", required=True, parser_class=_Parser)
    p = exp.add_parser("run", help="synthesise counts, reconstruct and map")
    p.add_argument("--config", help="ExperimentConfig JSON")
    p.add_argument("--calibrate", action="store_true", help="calibrate to the headline targets first")
    p.add_argument("--counts", type=int, help="override n_nominal")
    p.add_argument("--grid", default="desk")
    p.add_argument("--weighting", choices=("lattice", "voronoi"), default="lattice")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--resamples", type=int, default=50)
    p.set_defaults(func=cmd_experiment_run)
    p = exp.add_parser("calibrate", help="fit noise parameters to target figures")
    p.add_argument("--config", help="base ExperimentConfig JSON")
    p.add_argument("--counts", type=int)
    p.add_argument("--raw-f", type=float)
    p.add_argument("--f-max", type=float)
    p.add_argument("--purity", type=float)
    p.set_defaults(func=cmd_experiment_calibrate)

    for action in sub.choices.values():
        _common(action)
    for group in (tomo, exp):
        for action in group.choices.values():
            _common(action)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    args.tolerance_set = hasattr(args, "tolerance")
    try:
        if not hasattr(args, "seed"):
            args.seed = default_seed()
        args.output_dir = getattr(args, "output_dir", ".")
        args.jobs = getattr(args, "jobs", 1)
        args.tolerance = getattr(args, "tolerance", 1e-8)
        args.command_path = [
            c for c in (args.command, getattr(args, "tomo_command", None), getattr(args, "experiment_command", None))
            if c
        ]
        if args.command_path == ["tomo", "reconstruct"] and args.dataset is None:
            args.dataset = str(Path(args.output_dir) / "dataset.jsonl")
        return args.func(args)
    except (MatchgateError, ValidationError, KeyError, FileNotFoundError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"mgforge: error: {msg}\n")
        return 2
    except (RunFailure, ReconstructionError, CalibrationError, RuntimeError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"mgforge: failed: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
