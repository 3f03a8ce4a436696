"""Report payloads and byte-stable serialization.

JSON objects are written with lexicographically sorted keys and every float
formatted to 17 significant digits, so identical runs give identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .covsim import CovSimulation
from .diagnostics import FullModelInfo, case_cp_arrays
from .dimension import SirResult
from .errors import InputError
from .lars import LarsPath, LarsStep, SelectionResult
from .stress import StabilityReport, StressReport


def format_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def dumps(obj, indent: int = 2) -> str:
    """JSON text with sorted keys and 17-significant-digit floats."""
    out: list[str] = []

    def emit(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if o is None or isinstance(o, (bool, np.bool_)):
            out.append("null" if o is None else ("true" if o else "false"))
        elif isinstance(o, (int, np.integer)):
            out.append(str(int(o)))
        elif isinstance(o, (float, np.floating)):
            out.append(format_float(float(o)))
        elif isinstance(o, str):
            out.append(json.dumps(o, ensure_ascii=False))
        elif isinstance(o, dict):
            if not o:
                out.append("{}")
                return
            out.append("{\n")
            items = sorted(o.items(), key=lambda kv: str(kv[0]))
            for i, (k, v) in enumerate(items):
                out.append(pad + json.dumps(str(k), ensure_ascii=False) + ": ")
                emit(v, level + 1)
                out.append(",\n" if i < len(items) - 1 else "\n")
            out.append(end + "}")
        elif isinstance(o, (list, tuple, np.ndarray)):
            seq = list(o)
            if not seq:
                out.append("[]")
                return
            if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
                parts = []
                for v in seq:
                    buf_len = len(out)
                    emit(v, level + 1)
                    parts.append("".join(out[buf_len:]))
                    del out[buf_len:]
                out.append("[" + ", ".join(parts) + "]")
                return
            out.append("[\n")
            for i, v in enumerate(seq):
                out.append(pad)
                emit(v, level + 1)
                out.append(",\n" if i < len(seq) - 1 else "\n")
            out.append(end + "]")
        else:
            raise TypeError(f"cannot serialize {type(o).__name__}")

    emit(obj, 0)
    return "".join(out) + "\n"


def selection_payload(sel: SelectionResult) -> dict:
    return {
        "selected": list(sel.selected),
        "coefficients": [float(c) for c in sel.coefficients],
        "intercept": sel.intercept,
        "criterion_value": sel.criterion_value,
        "chosen_step": sel.chosen_step,
        "size": len(sel.selected),
    }


def step_payload(step: LarsStep) -> dict:
    return {
        "step_index": step.step_index,
        "entered": step.entered,
        "dropped": step.dropped,
        "active_set": list(step.active_set),
        "coefficients_std": step.coefficients_std,
        "coefficients_orig": step.coefficients_orig,
        "intercept": step.intercept,
        "max_abs_corr": step.max_abs_corr,
        "step_length": step.step_length,
        "cp": step.cp,
        "df_surrogate": step.df_surrogate,
    }


def full_model_payload(info: FullModelInfo | None) -> dict | None:
    if info is None:
        return None
    return {"n": info.n, "m": info.m, "sigma_hat_sq": info.sigma_hat_sq, "residual_df": info.residual_df}


def path_payload(path: LarsPath, selection: SelectionResult | None) -> dict:
    return {
        "predictors": list(path.predictor_names),
        "mode": path.mode,
        "entry_order": path.entry_order,
        "steps": [step_payload(s) for s in path.steps],
        "full_model": full_model_payload(path.full_model),
        "selection": None if selection is None else selection_payload(selection),
        "warnings": list(path.warnings),
    }


def case_payload(step: LarsStep, info: FullModelInfo) -> dict:
    fit, cov, deficit, cpi = case_cp_arrays(step.mu_hat, step.subset_leverage, info)
    records = [
        {
            "case_index": i,
            "fit_term": fit[i],
            "cov_term": cov[i],
            "leverage_deficit": deficit[i],
            "c_pi": cpi[i],
            "h": info.hat_diagonals[i],
            "u": step.subset_leverage[i],
        }
        for i in range(info.n)
    ]
    return {
        "step": step_payload(step),
        "full_model": full_model_payload(info),
        "sum_c_pi": float(np.sum(cpi)),
        "cp": step.cp,
        "records": records,
    }


def sir_payload(res: SirResult, names) -> dict:
    return {
        "predictors": list(names),
        "eigenvalues": res.eigenvalues,
        "directions": [list(row) for row in res.directions],
        "slice_count": res.slice_count,
        "slice_sizes": list(res.slice_sizes),
        "dim_tests": [
            {"d": t.d, "statistic": t.statistic, "degrees_of_freedom": t.degrees_of_freedom, "p_value": t.p_value}
            for t in res.dim_tests
        ],
        "estimated_d": res.estimated_d,
        "level": res.level,
    }


def stress_payload(rep: StressReport) -> dict:
    return {
        "baseline": {"label": rep.baseline_label, **selection_payload(rep.baseline_selection)},
        "perturbed": [{"label": lb, **selection_payload(s)} for lb, s in rep.perturbed_selections],
        "overlap": [
            {"first": o.first, "second": o.second, "intersection": o.intersection, "jaccard": o.jaccard}
            for o in rep.overlap
        ],
        "flags": list(rep.flags),
        "config_echo": rep.config_echo,
        "entry_orders": rep.entry_orders,
        "compositions": rep.compositions,
        "warnings": list(rep.warnings),
    }


def stability_payload(rep: StabilityReport) -> dict:
    return {
        "target_pair": list(rep.target_pair),
        "target_corr": rep.target_corr,
        "observed_corr": rep.observed_corr,
        "theta": rep.theta,
        "tilted_corr": rep.tilted_corr,
        "achieved_correlations": rep.achieved_correlations,
        "selection_frequency": rep.selection_frequency,
        "replicates": rep.replicates,
        "seed": rep.seed,
        "baseline_selection": list(rep.baseline_selection),
    }


def covsim_payload(sim: CovSimulation) -> dict:
    inside = sim.within(sim.reference_leverage)
    return {
        "estimates": sim.estimates,
        "standard_errors": sim.standard_errors,
        "reference_leverage": sim.reference_leverage,
        "mean_subset_leverage": sim.mean_subset_leverage,
        "fraction_within_3se": float(np.mean(inside)),
        "step_count": sim.step_count,
        "replicates": sim.replicates,
        "replicates_used": sim.replicates_used,
        "excluded": sim.excluded,
        "seed": sim.seed,
        "noise_sd": sim.noise_sd,
        "generator": sim.generator,
        "rng_algorithm": sim.rng_algorithm,
    }


PLOT_COLUMNS = ("step", "predictor", "coefficient", "cp")


def emit_plot_data(path: LarsPath, out) -> int:
    """Write the long-format (step, predictor, coefficient, cp) table; returns data rows written.

    Coefficients are on the standardized (unit-norm) scale.
    """
    out = Path(out)
    rows = 0
    try:
        with out.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(PLOT_COLUMNS)
            for step in path.steps:
                for name, coef in zip(path.predictor_names, step.coefficients_std):
                    w.writerow([step.step_index, name, format_float(float(coef)), format_float(step.cp)])
                    rows += 1
    except OSError as exc:
        raise InputError(f"cannot write plot data to {out}: {exc.strerror}") from None
    return rows


def read_plot_data(path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return [
            {
                "step": int(r["step"]),
                "predictor": r["predictor"],
                "coefficient": float(r["coefficient"]),
                "cp": float("nan") if r["cp"] == "null" else float(r["cp"]),
            }
            for r in csv.DictReader(fh)
        ]
