"""Command-line front end.

    larsaudit fit --mode plain
    larsaudit diagnose --step 7
    larsaudit dim --slices 10
    larsaudit stress-round --factor 2.2 --exclude SEX
    larsaudit stress-scale --exclude SEX
    larsaudit stress-marginal --pair S3,S4 --target-corr 0 --replicates 200
    larsaudit simulate-cov --step 3 --replicates 2000

Without ``--input`` the bundled diabetes file (response ``Y``) is used.
Exit status: 0 success, 1 domain error (JSON error object on stdout),
2 usage error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .covsim import simulate_cov
from .diagnostics import full_model_info
from .dimension import sir
from .errors import InputError, LarsAuditError
from .ingest import Dataset, load_csv, load_diabetes
from .lars import lars_path, select_by_cp
from .report import (
    case_payload,
    covsim_payload,
    dumps,
    emit_plot_data,
    path_payload,
    sir_payload,
    stability_payload,
    stress_payload,
)
from .stress import marginal_shift_stress, run_round_stress, scale_order_audit

DEFAULT_SEED = 20040201
TOOL = "larsaudit"


def _names(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def _pair(text: str) -> list[str]:
    names = _names(text)
    if len(names) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated names, got {text!r}")
    return names


def _floats(text: str) -> list[float]:
    try:
        return [float(s) for s in _names(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", metavar="PATH", help="CSV file (default: bundled diabetes data)")
    common.add_argument("--response", metavar="NAME", default="Y")
    common.add_argument("--mode", choices=("plain", "lasso"), default="plain")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--format", dest="output_format", choices=("json", "text"), default="json")
    common.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(prog=TOOL, description="LARS selection diagnostics")
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", parents=[common], help="LARS path and Cp selection")
    p.add_argument("--max-steps", type=int)
    p.add_argument("--plot-data", metavar="PATH", help="also write long-format coefficient CSV")

    p = sub.add_parser("diagnose", parents=[common], help="per-case Cp at one path step")
    p.add_argument("--step", type=int, help="path step (default: the Cp-selected step)")

    p = sub.add_parser("dim", parents=[common], help="structural dimension by SIR")
    p.add_argument("--slices", type=int, default=10)
    p.add_argument("--level", type=float, default=0.05)

    p = sub.add_parser("stress-round", parents=[common], help="rounded-copy augmentation")
    p.add_argument("--factor", type=float, default=2.2)
    p.add_argument("--exclude", type=_names, default=[], metavar="NAMES")
    p.add_argument("--prefix", default="r")

    p = sub.add_parser("stress-scale", parents=[common], help="scaling-order audit")
    p.add_argument("--exclude", type=_names, default=[], metavar="NAMES",
                   help="predictors whose quadratic is omitted")

    p = sub.add_parser("stress-marginal", parents=[common], help="marginal-shift stability")
    p.add_argument("--pair", type=_pair, required=True, metavar="NAME,NAME")
    p.add_argument("--target-corr", type=float, required=True)
    p.add_argument("--replicates", type=int, default=200)

    p = sub.add_parser("simulate-cov", parents=[common], help="Monte Carlo check of cov(mu_i, y_i)")
    p.add_argument("--step", type=int, required=True)
    p.add_argument("--replicates", type=int, default=2000)
    p.add_argument("--noise-sd", type=float, help="default: full-model residual sd")
    p.add_argument("--generator", choices=("fitted-beta", "fixed-beta"), default="fitted-beta")
    p.add_argument("--beta", type=_floats, metavar="NUMBERS", help="slopes for fixed-beta")
    return parser


def _load(args) -> Dataset:
    if args.input is None:
        if args.response != "Y":
            raise InputError(f"response column {args.response!r} not found in bundled diabetes data")
        return load_diabetes()
    return load_csv(args.input, args.response)


def _fit(args, ds):
    path = lars_path(ds, args.mode, args.max_steps)
    sel = select_by_cp(path) if path.full_model is not None else None
    if args.plot_data:
        emit_plot_data(path, args.plot_data)
    payload = path_payload(path, sel)
    lines = [f"LARS ({args.mode}) on {ds.n} cases, {ds.m} predictors"]
    for s in path.steps:
        change = f"+{s.entered}" if s.entered else (f"-{s.dropped}" if s.dropped else "")
        lines.append(f"  step {s.step_index:3d} {change:<14} |A|={len(s.active_set):3d}  Cp={s.cp:12.4f}")
    if sel is not None:
        lines.append(f"selected (step {sel.chosen_step}, Cp={sel.criterion_value:.4f}): {', '.join(sel.selected)}")
    return payload, lines


def _diagnose(args, ds):
    path = lars_path(ds, args.mode)
    info = path.full_model
    if info is None:
        info = full_model_info(ds)
    step_index = args.step if args.step is not None else select_by_cp(path).chosen_step
    if not 0 <= step_index < len(path.steps):
        raise InputError(f"step {step_index} outside path of {len(path.steps)} steps")
    payload = case_payload(path.steps[step_index], info)
    recs = sorted(payload["records"], key=lambda r: -r["c_pi"])[:10]
    lines = [
        f"per-case Cp at step {step_index}: sum={payload['sum_c_pi']:.6f}  Cp={payload['cp']:.6f}",
        "  case      c_pi      fit       u     h-u",
    ]
    lines += [
        f"  {r['case_index']:4d} {r['c_pi']:9.4f} {r['fit_term']:8.4f} {r['cov_term']:7.4f} {r['leverage_deficit']:7.4f}"
        for r in recs
    ]
    return payload, lines


def _dim(args, ds):
    res = sir(ds, args.slices, args.level)
    lines = [f"SIR with {res.slice_count} slices: estimated d = {res.estimated_d}"]
    lines += [
        f"  d={t.d}: stat={t.statistic:.3f} df={t.degrees_of_freedom} p={t.p_value:.4g}" for t in res.dim_tests
    ]
    return sir_payload(res, ds.predictor_names), lines


def _stress_lines(rep):
    lines = [f"{rep.baseline_label}: {', '.join(rep.baseline_selection.selected)}"]
    lines += [f"{lb}: {', '.join(s.selected)}" for lb, s in rep.perturbed_selections]
    lines += [f"  {o.first} vs {o.second}: shared {o.intersection}, jaccard {o.jaccard:.3f}" for o in rep.overlap]
    for lb, comp in rep.compositions.items():
        lines.append(f"  {lb}: " + ", ".join(f"{k} {v}" for k, v in comp.items()))
    lines += [f"  flag: {f}" for f in rep.flags]
    return lines


def _stress_round(args, ds):
    rep = run_round_stress(ds, args.factor, args.exclude, args.prefix, args.mode)
    return stress_payload(rep), _stress_lines(rep)


def _stress_scale(args, ds):
    rep = scale_order_audit(ds, args.exclude, args.mode)
    return stress_payload(rep), _stress_lines(rep)


def _stress_marginal(args, ds):
    rep = marginal_shift_stress(ds, tuple(args.pair), args.target_corr, args.replicates, args.seed, args.mode)
    lines = [
        f"pair {rep.target_pair[0]}/{rep.target_pair[1]}: observed r={rep.observed_corr:.4f}, "
        f"tilted r={rep.tilted_corr:.4f} (theta={rep.theta:.4f}), {rep.replicates} replicates"
    ]
    lines += [f"  {nm:<12} {f:.3f}" for nm, f in rep.selection_frequency.items()]
    return stability_payload(rep), lines


def _simulate_cov(args, ds):
    noise = args.noise_sd
    if noise is None:
        noise = float(np.sqrt(full_model_info(ds).sigma_hat_sq))
    sim = simulate_cov(ds, args.generator, noise, args.step, args.replicates, args.seed, args.beta, args.mode)
    payload = covsim_payload(sim)
    lines = [
        f"cov(mu_i, y_i)/sigma^2 at step {sim.step_count}: {sim.replicates_used} replicates "
        f"({sim.excluded} excluded)",
        f"  sum of estimates {np.sum(sim.estimates):.4f} vs sum u_i {np.sum(sim.reference_leverage):.4f}",
        f"  cases within 3 MC s.e. of u_i: {payload['fraction_within_3se']:.3f}",
    ]
    return payload, lines


COMMANDS = {
    "fit": _fit,
    "diagnose": _diagnose,
    "dim": _dim,
    "stress-round": _stress_round,
    "stress-scale": _stress_scale,
    "stress-marginal": _stress_marginal,
    "simulate-cov": _simulate_cov,
}


def _write(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {k: v for k, v in sorted(vars(args).items())}
    try:
        ds = _load(args)
        payload, lines = COMMANDS[args.command](args, ds)
    except LarsAuditError as exc:
        err = {"error": {"type": type(exc).__name__, "message": str(exc)}, "config": config,
               "tool": TOOL, "version": __version__}
        sys.stdout.write(dumps(err))
        return 1
    if args.output_format == "json":
        report = {
            "tool": TOOL,
            "version": __version__,
            "command": args.command,
            "config": config,
            "dataset": {"provenance": ds.provenance if args.input else "bundled:diabetes.csv",
                        "n": ds.n, "m": ds.m, "predictors": list(ds.predictor_names)},
            "payload": payload,
        }
        text = dumps(report)
    else:
        text = "\n".join(lines) + "\n"
    try:
        _write(text, args.out)
    except OSError as exc:
        sys.stdout.write(dumps({"error": {"type": "OSError", "message": str(exc)}, "config": config}))
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
