"""Datasets: CSV loading, standardisation and polynomial term expansion."""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .errors import InputError, RankError
from .numerics import least_squares, numerical_rank

ScalingRule = Literal["unit-norm", "unit-sd"]
TermKind = Literal["main", "quadratic", "interaction"]

DIABETES_RESOURCE = "diabetes.csv"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Named predictor matrix ``X`` (n x m) and response ``y``."""

    predictor_names: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        y = np.array(self.y, dtype=float).ravel()
        if X.ndim == 1:
            X = X[:, None]
        names = tuple(str(s) for s in self.predictor_names)
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise InputError(f"X shape {X.shape} does not match response length {y.shape[0]}")
        if len(names) != X.shape[1]:
            raise InputError(f"{len(names)} names for {X.shape[1]} predictor columns")
        if len(set(names)) != len(names):
            dup = sorted({s for s in names if names.count(s) > 1})
            raise InputError(f"duplicate predictor names: {dup}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise InputError("dataset contains non-finite values")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "predictor_names", names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return self.X.shape[1]

    def index(self, name: str) -> int:
        try:
            return self.predictor_names.index(name)
        except ValueError:
            raise InputError(f"unknown predictor {name!r}") from None

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.index(name)]

    def with_columns(self, X, names, provenance=None) -> "Dataset":
        return Dataset(tuple(names), X, self.y, provenance or self.provenance)


def load_csv(path, response: str) -> Dataset:
    """Read a headed, comma-separated numeric file.

    Every column other than ``response`` becomes a predictor, in file order.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise InputError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    if response not in header:
        raise InputError(f"response column {response!r} not found in {path} (columns: {header})")
    if len(rows) < 2:
        raise InputError(f"{path} has a header but no data rows")

    values = np.empty((len(rows) - 1, len(header)))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise InputError(f"{path}: row {i} has {len(row)} cells, header has {len(header)}")
        for j, cell in enumerate(row):
            try:
                values[i - 2, j] = float(cell)
            except ValueError:
                raise InputError(
                    f"{path}: non-numeric value {cell!r} at row {i}, column {header[j]!r}"
                ) from None
            if not np.isfinite(values[i - 2, j]):
                raise InputError(f"{path}: non-finite value at row {i}, column {header[j]!r}")

    r = header.index(response)
    keep = [j for j in range(len(header)) if j != r]
    return Dataset(tuple(header[j] for j in keep), values[:, keep], values[:, r], str(path))


def diabetes_path() -> Path:
    """Location of the bundled diabetes file (442 cases, AGE..S6 and Y)."""
    return Path(str(resources.files("larsaudit") / "data" / DIABETES_RESOURCE))


def load_diabetes() -> Dataset:
    ds = load_csv(diabetes_path(), "Y")
    return Dataset(ds.predictor_names, ds.X, ds.y, "diabetes")


@dataclass(frozen=True, eq=False)
class StandardizedView:
    base: Dataset
    column_means: np.ndarray
    column_scales: np.ndarray
    scaling_rule: ScalingRule
    response_mean: float

    @property
    def X(self) -> np.ndarray:
        return (self.base.X - self.column_means) / self.column_scales

    @property
    def y_centered(self) -> np.ndarray:
        return self.base.y - self.response_mean

    def inverse(self, Z) -> np.ndarray:
        return np.asarray(Z) * self.column_scales + self.column_means

    def as_dataset(self) -> Dataset:
        return self.base.with_columns(self.X, self.base.predictor_names)


def standardize(dataset: Dataset, rule: ScalingRule = "unit-norm") -> StandardizedView:
    """Center every column and scale it to unit length or unit sample sd."""
    if rule not in ("unit-norm", "unit-sd"):
        raise InputError(f"unknown scaling rule {rule!r}")
    means = dataset.X.mean(axis=0)
    centered = dataset.X - means
    if rule == "unit-norm":
        scales = np.linalg.norm(centered, axis=0)
    else:
        scales = centered.std(axis=0, ddof=1) if dataset.n > 1 else np.zeros(dataset.m)
    # a column is constant when its spread is lost in rounding noise
    tiny = scales <= 1e-13 * np.maximum(np.abs(means), 1.0) * np.sqrt(dataset.n)
    if np.any(tiny):
        bad = [dataset.predictor_names[j] for j in np.flatnonzero(tiny)]
        raise InputError(f"constant predictor column(s): {bad}")
    return StandardizedView(dataset, means, scales, rule, float(dataset.y.mean()))


@dataclass(frozen=True)
class TermExpansion:
    source_names: tuple[str, ...]
    term_kinds: tuple[TermKind, ...]
    term_parents: tuple[tuple[int, ...], ...]
    exclusions: tuple[str, ...] = field(default=())

    def count(self, kind: TermKind, columns: Sequence[int] | None = None) -> int:
        idx = range(len(self.term_kinds)) if columns is None else columns
        return sum(1 for j in idx if self.term_kinds[j] == kind)


def expand_terms(
    dataset: Dataset,
    quadratics: bool = True,
    interactions: bool = True,
    quadratic_exclusions: Sequence[str] = (),
) -> tuple[Dataset, TermExpansion]:
    """Append products of predictors.

    Column order: the m main effects, then interactions ``A:B`` with parents
    in lexicographic index order, then quadratics ``A^2`` in source order,
    skipping any name in ``quadratic_exclusions``.
    """
    names = dataset.predictor_names
    for name in quadratic_exclusions:
        if name not in names:
            raise InputError(f"unknown exclusion {name!r}")
    X = dataset.X
    cols = [X[:, j] for j in range(dataset.m)]
    out_names = list(names)
    kinds: list[TermKind] = ["main"] * dataset.m
    parents: list[tuple[int, ...]] = [(j,) for j in range(dataset.m)]

    if interactions:
        for a, b in itertools.combinations(range(dataset.m), 2):
            cols.append(X[:, a] * X[:, b])
            out_names.append(f"{names[a]}:{names[b]}")
            kinds.append("interaction")
            parents.append((a, b))
    if quadratics:
        for a in range(dataset.m):
            if names[a] in quadratic_exclusions:
                continue
            cols.append(X[:, a] * X[:, a])
            out_names.append(f"{names[a]}^2")
            kinds.append("quadratic")
            parents.append((a,))

    expanded = Dataset(
        tuple(out_names),
        np.column_stack(cols),
        dataset.y,
        f"{dataset.provenance}+terms" if dataset.provenance else "terms",
    )
    return expanded, TermExpansion(names, tuple(kinds), tuple(parents), tuple(quadratic_exclusions))


def orthogonalize_expansion(expanded: Dataset, expansion: TermExpansion) -> Dataset:
    """Replace each non-main column by its residual on (1, main effects)."""
    main = [j for j, k in enumerate(expansion.term_kinds) if k == "main"]
    n = expanded.n
    design = np.column_stack([np.ones(n), expanded.X[:, main]])
    if numerical_rank(design) < design.shape[1]:
        raise RankError("main-effect block (with intercept) is rank deficient")
    X = expanded.X.copy()
    for j, kind in enumerate(expansion.term_kinds):
        if kind != "main":
            X[:, j] = least_squares(design, X[:, j]).residuals
    return expanded.with_columns(X, expanded.predictor_names, f"{expanded.provenance}+orth")
