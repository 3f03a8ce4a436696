import numpy as np
import pytest

from larsaudit.errors import ConvergenceError, InputError
from larsaudit.ingest import Dataset
from larsaudit.lars import lars_path, select_by_cp
from larsaudit.stress import (
    jaccard,
    marginal_shift_stress,
    round_augment,
    round_half_away,
    run_round_stress,
    scale_order_audit,
    weighted_bootstrap_indices,
)

from conftest import random_dataset


def freq_se(p, r):
    return np.sqrt(p * (1 - p) / r)


def test_rounding_rule():
    np.testing.assert_array_equal(round_half_away(2.2 * np.array([7.0, -7.0])), [15.0, -15.0])
    np.testing.assert_array_equal(round_half_away([2.5, -2.5, 0.5, 1.49]), [3.0, -3.0, 1.0, 1.0])


def test_round_augment_diabetes(diabetes):
    aug = round_augment(diabetes, 2.2, ["SEX"], "r")
    assert aug.m == 19
    assert "rSEX" not in aug.predictor_names
    assert aug.X[:, :10].tobytes() == diabetes.X.tobytes()
    np.testing.assert_array_equal(aug.column("rBMI"), round_half_away(2.2 * diabetes.column("BMI")))


def test_round_augment_errors(diabetes):
    with pytest.raises(InputError):
        round_augment(diabetes, 2.2, ["NOPE"])
    ds = Dataset(("a", "ra"), [[1.0, 2.0], [2.0, 3.0], [4.0, 1.0]], [1.0, 2.0, 3.0])
    with pytest.raises(InputError, match="collide"):
        round_augment(ds, 2.0)
    with pytest.raises(InputError):
        round_augment(ds, -1.0, ["a", "ra"])


def test_identity_rounding_is_skipped_as_collinear():
    rng = np.random.default_rng(1)
    X = rng.integers(0, 20, (40, 2)).astype(float)
    y = X @ [1.0, 2.0] + rng.standard_normal(40)
    ds = Dataset(("a", "b"), X, y)
    aug = round_augment(ds, 1.0)
    np.testing.assert_array_equal(aug.column("ra"), ds.column("a"))
    path = lars_path(aug)
    assert path.warnings
    assert len(path.steps[-1].active_set) == 2


def test_round_stress_diabetes(diabetes):
    rep = run_round_stress(diabetes, 2.2, ["SEX"])
    assert rep.baseline_selection.selected == ("BMI", "S5", "BP", "S3", "SEX", "S6", "S1")
    aug = rep.selection("rounded")
    assert aug.selected == ("BMI", "S5", "rBP", "rS3", "BP", "SEX", "S6", "S1")
    assert "original and rounded version co-selected: BP, rBP" in rep.flags
    assert "rounded variable selected: rS3" in rep.flags
    assert rep.config_echo["rounding_rule"] == "half-away-from-zero"
    ov = rep.overlap[0]
    assert ov.intersection == 6
    assert ov.jaccard == jaccard(rep.baseline_selection.selected, aug.selected) == 6 / 9


def test_round_stress_all_excluded():
    ds = random_dataset(2, 30, 3)
    rep = run_round_stress(ds, 2.2, list(ds.predictor_names))
    assert rep.overlap[0].jaccard == 1.0
    assert rep.selection("rounded").selected == rep.baseline_selection.selected


def test_round_stress_huge_factor_no_crash():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((40, 3))
    y = 5 * X[:, 0] + 0.5 * rng.standard_normal(40)
    rep = run_round_stress(Dataset(("a", "b", "c"), X, y), 1e9, [])
    assert rep.warnings or any("co-selected" in f for f in rep.flags)


def test_scale_order_single_predictor():
    rng = np.random.default_rng(4)
    x = rng.normal(3, 1, 60)
    ds = Dataset(("a",), x[:, None], x + 0.5 * x**2 + rng.standard_normal(60))
    rep = scale_order_audit(ds)
    assert set(rep.selection("scale-first").selected) == set(rep.selection("expand-first").selected)


def test_scale_order_diabetes(diabetes):
    rep = scale_order_audit(diabetes, ["SEX"])
    a, b, c = (set(rep.selection(lb).selected) for lb in ("scale-first", "expand-first", "orthogonal"))
    assert rep.compositions["scale-first"] == {"main": 6, "interaction": 6, "quadratic": 3}
    assert rep.compositions["expand-first"] == {"main": 2, "interaction": 6, "quadratic": 0}
    assert len(a & b) == 3
    assert c != a and c != b
    assert rep.config_echo["expanded_m"] == 64


def test_bootstrap_indices_uniform_is_plain():
    rng1, rng2 = np.random.default_rng(7), np.random.default_rng(7)
    idx = weighted_bootstrap_indices(rng1, np.full(10, 0.1))
    u = rng2.random(10)
    np.testing.assert_array_equal(idx, np.floor(u * 10).astype(int))


def test_null_shift_is_plain_bootstrap(diabetes):
    obs = float(np.corrcoef(diabetes.column("S3"), diabetes.column("S4"))[0, 1])
    rep = marginal_shift_stress(diabetes, ("S3", "S4"), obs, 1, 99)
    assert abs(rep.theta) <= 1e-6
    rng = np.random.default_rng(99)
    idx = weighted_bootstrap_indices(rng, np.full(diabetes.n, 1.0 / diabetes.n))
    boot = Dataset(diabetes.predictor_names, diabetes.X[idx], diabetes.y[idx])
    assert rep.selections[0] == select_by_cp(lars_path(boot)).selected


@pytest.fixture(scope="module")
def diabetes_shift_runs():
    from larsaudit.ingest import load_diabetes

    ds = load_diabetes()
    obs = float(np.corrcoef(ds.column("S3"), ds.column("S4"))[0, 1])
    null = marginal_shift_stress(ds, ("S3", "S4"), obs, 200, 20040201)
    shifted = marginal_shift_stress(ds, ("S3", "S4"), 0.0, 200, 20040201)
    return null, shifted


@pytest.mark.slow
def test_null_shift_ranking(diabetes_shift_runs):
    null, _ = diabetes_shift_runs
    freq = null.selection_frequency
    chosen = set(null.baseline_selection)
    assert min(freq[nm] for nm in chosen) >= max(freq[nm] for nm in freq if nm not in chosen)


@pytest.mark.slow
def test_shifted_tilt_hits_target(diabetes_shift_runs):
    _, shifted = diabetes_shift_runs
    assert abs(shifted.tilted_corr) <= 0.02
    assert abs(shifted.achieved_correlations.mean()) < 0.05
    assert all(0 <= f <= 1 for f in shifted.selection_frequency.values())


@pytest.mark.slow
def test_shift_changes_some_selection_frequency(diabetes_shift_runs):
    null, shifted = diabetes_shift_runs
    moved = []
    for nm, p0 in null.selection_frequency.items():
        p1 = shifted.selection_frequency[nm]
        se = np.hypot(freq_se(p0, 200), freq_se(p1, 200))
        if se > 0 and abs(p1 - p0) > 3 * se:
            moved.append(nm)
    assert moved


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="measured: S3 frequency is 0.995 in both runs")
def test_shift_changes_s3_frequency(diabetes_shift_runs):
    null, shifted = diabetes_shift_runs
    p0, p1 = null.selection_frequency["S3"], shifted.selection_frequency["S3"]
    se = np.hypot(freq_se(p0, 200), freq_se(p1, 200))
    assert abs(p1 - p0) > 3 * se


@pytest.mark.slow
def test_near_duplicates_share_selection_mass():
    rng = np.random.default_rng(3)
    n = 200
    z = rng.standard_normal(n)
    x1 = z + 0.23 * rng.standard_normal(n)
    x2 = z + 0.23 * rng.standard_normal(n)
    X = np.column_stack([x1, x2, rng.standard_normal((n, 3))])
    y = x1 + x2 + 4.0 * rng.standard_normal(n)
    ds = Dataset(("x1", "x2", "n1", "n2", "n3"), X, y)
    high = marginal_shift_stress(ds, ("x1", "x2"), 0.95, 400, 5)
    low = marginal_shift_stress(ds, ("x1", "x2"), 0.0, 400, 5)
    f1, f2 = low.selection_frequency["x1"], low.selection_frequency["x2"]
    either = np.mean([("x1" in s) or ("x2" in s) for s in low.selections])
    assert f1 < 0.9 and f2 < 0.9
    assert either >= 0.9
    # mass moved from the in-sample favourite to its twin
    assert high.selection_frequency["x1"] - f1 > 3 * np.hypot(freq_se(f1, 400), freq_se(high.selection_frequency["x1"], 400))
    assert f2 > high.selection_frequency["x2"]


def test_unreachable_target_reports_range():
    rng = np.random.default_rng(8)
    x = rng.standard_normal(30)
    ds = Dataset(("a", "b", "c"), np.column_stack([x, 2 * x + 1, rng.standard_normal(30)]), rng.standard_normal(30))
    with pytest.raises(ConvergenceError, match="reachable range"):
        marginal_shift_stress(ds, ("a", "b"), 0.0, 2, 1)


def test_marginal_validation(diabetes):
    with pytest.raises(InputError):
        marginal_shift_stress(diabetes, ("S3", "S3"), 0.0, 2, 1)
    with pytest.raises(InputError):
        marginal_shift_stress(diabetes, ("S3", "S4"), 1.0, 2, 1)
    with pytest.raises(InputError):
        marginal_shift_stress(diabetes, ("S3", "ZZ"), 0.0, 2, 1)
