"""Selection stress experiments.

* rounded-copy augmentation: add noisy integer-rounded copies of predictors
  and see whether LARS prefers them;
* scaling-order audit: standardize-then-expand vs expand-then-standardize vs
  orthogonalized expansion;
* marginal shift: reweight rows by exponential tilting so a predictor pair's
  correlation moves to a target, then bootstrap and tally selections.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize

from .errors import ConvergenceError, InputError
from .ingest import Dataset, TermExpansion, expand_terms, orthogonalize_expansion, standardize
from .lars import Mode, SelectionResult, lars_path, select_by_cp

ROUNDING_RULE = "half-away-from-zero"
THETA_BOUND = 20.0
CORR_TOL = 0.02


@dataclass(frozen=True)
class Overlap:
    first: str
    second: str
    intersection: int
    jaccard: float


@dataclass(eq=False)
class StressReport:
    baseline_label: str
    baseline_selection: SelectionResult
    perturbed_selections: list[tuple[str, SelectionResult]]
    overlap: list[Overlap]
    flags: list[str]
    config_echo: dict
    entry_orders: dict[str, list[str]] = field(default_factory=dict)
    compositions: dict[str, dict[str, int]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def selection(self, label: str) -> SelectionResult:
        if label == self.baseline_label:
            return self.baseline_selection
        return dict(self.perturbed_selections)[label]


@dataclass(eq=False)
class StabilityReport:
    target_pair: tuple[str, str]
    target_corr: float
    observed_corr: float
    theta: float
    tilted_corr: float
    achieved_correlations: np.ndarray
    selection_frequency: dict[str, float]
    selections: list[tuple[str, ...]]
    replicates: int
    seed: int
    baseline_selection: tuple[str, ...]


def jaccard(a: Sequence[str], b: Sequence[str]) -> float:
    a, b = set(a), set(b)
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def _overlaps(labelled: list[tuple[str, SelectionResult]]) -> list[Overlap]:
    out = []
    for (la, sa), (lb, sb) in itertools.combinations(labelled, 2):
        inter = len(set(sa.selected) & set(sb.selected))
        out.append(Overlap(la, lb, inter, jaccard(sa.selected, sb.selected)))
    return out


def round_half_away(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return np.sign(v) * np.floor(np.abs(v) + 0.5)


def round_augment(dataset: Dataset, factor: float = 2.2, exclude: Sequence[str] = (), prefix: str = "r") -> Dataset:
    """Append ``prefix + name`` = round(factor * column) for each non-excluded predictor."""
    if not (np.isfinite(factor) and factor > 0):
        raise InputError(f"factor must be finite and positive, got {factor}")
    names = dataset.predictor_names
    for name in exclude:
        if name not in names:
            raise InputError(f"unknown exclusion {name!r}")
    keep = [j for j, nm in enumerate(names) if nm not in exclude]
    new_names = [prefix + names[j] for j in keep]
    clash = sorted(set(new_names) & set(names))
    if clash:
        raise InputError(f"rounded names collide with existing predictors: {clash}")
    rounded = round_half_away(factor * dataset.X[:, keep])
    X = np.column_stack([dataset.X, rounded]) if keep else dataset.X
    return dataset.with_columns(X, list(names) + new_names, f"{dataset.provenance}+rounded")


def run_round_stress(
    dataset: Dataset,
    factor: float = 2.2,
    exclude: Sequence[str] = (),
    prefix: str = "r",
    mode: Mode = "plain",
) -> StressReport:
    augmented = round_augment(dataset, factor, exclude, prefix)
    base_path = lars_path(dataset, mode)
    aug_path = lars_path(augmented, mode)
    base = select_by_cp(base_path)
    flags = []
    if aug_path.full_model is None:
        # rounded copies duplicate existing columns to within tolerance
        aug = select_by_cp(aug_path, base_path.full_model)
        flags.append("augmented design rank deficient; Cp uses the baseline residual variance")
    else:
        aug = select_by_cp(aug_path)

    originals = set(dataset.predictor_names)
    rounded_of = {prefix + nm: nm for nm in dataset.predictor_names if nm not in exclude}
    for name in aug.selected:
        if name in rounded_of:
            flags.append(f"rounded variable selected: {name}")
    for name in aug.selected:
        if name in rounded_of and rounded_of[name] in aug.selected:
            flags.append(f"original and rounded version co-selected: {rounded_of[name]}, {name}")
    flags += [f"collinearity: {w}" for w in aug_path.warnings]
    assert all(nm in originals or nm in rounded_of for nm in aug.selected)

    labelled = [("baseline", base), ("rounded", aug)]
    return StressReport(
        baseline_label="baseline",
        baseline_selection=base,
        perturbed_selections=[("rounded", aug)],
        overlap=_overlaps(labelled),
        flags=flags,
        config_echo={
            "experiment": "round",
            "factor": float(factor),
            "exclude": list(exclude),
            "prefix": prefix,
            "mode": mode,
            "rounding_rule": ROUNDING_RULE,
            "n": dataset.n,
            "m": dataset.m,
            "m_augmented": augmented.m,
        },
        entry_orders={"baseline": base_path.entry_order, "rounded": aug_path.entry_order},
        warnings=list(base_path.warnings) + list(aug_path.warnings),
    )


def _composition(sel: SelectionResult, expanded: Dataset, expansion: TermExpansion) -> dict[str, int]:
    idx = [expanded.index(nm) for nm in sel.selected]
    return {k: expansion.count(k, idx) for k in ("main", "interaction", "quadratic")}


def scale_order_audit(
    dataset: Dataset,
    quadratic_exclusions: Sequence[str] = (),
    mode: Mode = "plain",
) -> StressReport:
    """Select from the quadratic-plus-interaction expansion three ways.

    ``scale-first``: unit-sd standardize, then expand.
    ``expand-first``: expand raw columns, then standardize.
    ``orthogonal``: expand, residualize non-main terms on the mains, standardize.
    """
    excl = list(quadratic_exclusions)
    sv = standardize(dataset, "unit-sd")
    a_data, a_exp = expand_terms(sv.as_dataset(), True, True, excl)
    b_raw, b_exp = expand_terms(dataset, True, True, excl)
    b_data = standardize(b_raw, "unit-sd").as_dataset()
    c_data = standardize(orthogonalize_expansion(b_raw, b_exp), "unit-sd").as_dataset()
    if dataset.n <= b_raw.m + 1:
        raise InputError(f"expansion has {b_raw.m} terms; need n > {b_raw.m + 1}, have {dataset.n}")

    runs = {}
    for label, data, exp in (
        ("scale-first", a_data, a_exp),
        ("expand-first", b_data, b_exp),
        ("orthogonal", c_data, b_exp),
    ):
        path = lars_path(data, mode)
        runs[label] = (path, select_by_cp(path), data, exp)

    labelled = [(lb, runs[lb][1]) for lb in runs]
    flags = []
    for ov in _overlaps(labelled):
        if ov.jaccard < 1.0:
            flags.append(f"selections differ: {ov.first} vs {ov.second} (shared {ov.intersection})")
    return StressReport(
        baseline_label="scale-first",
        baseline_selection=runs["scale-first"][1],
        perturbed_selections=labelled[1:],
        overlap=_overlaps(labelled),
        flags=flags,
        config_echo={
            "experiment": "scale-order",
            "quadratic_exclusions": excl,
            "mode": mode,
            "scaling_rule": "unit-sd",
            "n": dataset.n,
            "m": dataset.m,
            "expanded_m": b_raw.m,
        },
        entry_orders={lb: runs[lb][0].entry_order for lb in runs},
        compositions={lb: _composition(runs[lb][1], runs[lb][2], runs[lb][3]) for lb in runs},
        warnings=[w for lb in runs for w in runs[lb][0].warnings],
    )


def weighted_corr(x, y, w) -> float:
    w = np.asarray(w, dtype=float) / np.sum(w)
    xm, ym = w @ x, w @ y
    dx, dy = x - xm, y - ym
    return float((w @ (dx * dy)) / np.sqrt((w @ dx**2) * (w @ dy**2)))


def tilt_weights(zprod, theta: float) -> np.ndarray:
    t = theta * zprod
    w = np.exp(t - t.max())
    return w / w.sum()


def solve_tilt(x, y, target: float) -> float:
    """Tilting parameter giving weighted corr(x, y) = target, searched on [-20, 20]."""
    zx = (x - x.mean()) / x.std()
    zy = (y - y.mean()) / y.std()
    zprod = zx * zy

    def f(theta):
        return weighted_corr(x, y, tilt_weights(zprod, theta)) - target

    if abs(f(0.0)) <= 1e-12:
        return 0.0
    grid = np.linspace(-THETA_BOUND, THETA_BOUND, 81)
    vals = np.array([f(t) for t in grid])
    sign_change = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
    if sign_change.size == 0:
        lo, hi = vals.min() + target, vals.max() + target
        raise ConvergenceError(
            f"target correlation {target} unreachable by tilting; reachable range [{lo:.4f}, {hi:.4f}]"
        )
    # bracket nearest theta = 0
    k = sign_change[np.argmin(np.abs(grid[sign_change] + grid[sign_change + 1]))]
    return float(optimize.brentq(f, grid[k], grid[k + 1], xtol=1e-14, rtol=1e-14))


def weighted_bootstrap_indices(rng: np.random.Generator, weights) -> np.ndarray:
    """Inverse-CDF resampling; uniform weights give the ordinary bootstrap."""
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    u = rng.random(len(cdf))
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)


def marginal_shift_stress(
    dataset: Dataset,
    pair: tuple[str, str],
    target_corr: float,
    replicates: int,
    seed: int,
    mode: Mode = "plain",
) -> StabilityReport:
    """Tilted-bootstrap selection frequencies with the pair's correlation moved to ``target_corr``.

    Replicate ``r`` draws its resample with a generator seeded ``seed + r``.
    """
    a, b = pair
    if a == b:
        raise InputError("pair must name two distinct predictors")
    if not -1 < target_corr < 1:
        raise InputError(f"target_corr must lie in (-1, 1), got {target_corr}")
    if replicates < 1:
        raise InputError("replicates must be >= 1")
    x, y = dataset.column(a), dataset.column(b)
    observed = float(np.corrcoef(x, y)[0, 1])
    theta = solve_tilt(x, y, target_corr)
    zprod = ((x - x.mean()) / x.std()) * ((y - y.mean()) / y.std())
    weights = tilt_weights(zprod, theta)
    tilted = weighted_corr(x, y, weights)
    if abs(tilted - target_corr) > CORR_TOL:
        raise ConvergenceError(f"tilted correlation {tilted:.4f} misses target {target_corr}")

    counts = dict.fromkeys(dataset.predictor_names, 0)
    achieved = np.empty(replicates)
    selections = []
    ia, ib = dataset.index(a), dataset.index(b)
    for r in range(replicates):
        rng = np.random.default_rng(seed + r)
        idx = weighted_bootstrap_indices(rng, weights)
        sample = Dataset(dataset.predictor_names, dataset.X[idx], dataset.y[idx], dataset.provenance)
        achieved[r] = np.corrcoef(sample.X[:, ia], sample.X[:, ib])[0, 1]
        sel = select_by_cp(lars_path(sample, mode)).selected
        selections.append(sel)
        for nm in sel:
            counts[nm] += 1

    return StabilityReport(
        target_pair=(a, b),
        target_corr=float(target_corr),
        observed_corr=observed,
        theta=theta,
        tilted_corr=tilted,
        achieved_correlations=achieved,
        selection_frequency={nm: counts[nm] / replicates for nm in dataset.predictor_names},
        selections=selections,
        replicates=replicates,
        seed=seed,
        baseline_selection=select_by_cp(lars_path(dataset, mode)).selected,
    )
