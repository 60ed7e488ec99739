"""Domain types, CSV ingestion and seeded randomness shared by the other modules."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

DISCRETE = "discrete"
CONTINUOUS = "continuous"

ESTIMATORS = ("mi", "loss")
SAMPLERS = ("unbiased", "paper", "exact")

PRNG_ALGORITHM = "numpy-PCG64/SeedSequence"


class DataError(ValueError):
    """Input data violates the table contract (shape, values, schema)."""


class ContractError(ValueError):
    """A function was called outside its documented preconditions."""


@dataclass(frozen=True)
class FeatureColumn:
    name: str
    values: np.ndarray
    kind: str = CONTINUOUS

    def __post_init__(self):
        if not self.name:
            raise DataError("feature names must be nonempty")
        if self.kind not in (DISCRETE, CONTINUOUS):
            raise DataError(f"column {self.name!r}: unknown kind {self.kind!r}")
        values = np.asarray(self.values)
        if values.ndim != 1:
            raise DataError(f"column {self.name!r} must be one-dimensional")
        if self.kind == DISCRETE:
            if values.size and not np.issubdtype(values.dtype, np.integer):
                as_float = values.astype(float)
                if not np.all(np.isfinite(as_float)) or np.any(as_float != np.round(as_float)):
                    raise DataError(f"column {self.name!r}: discrete codes must be integers")
            values = values.astype(np.int64)
            if values.size and values.min() < 0:
                raise DataError(f"column {self.name!r}: discrete codes must be nonnegative")
        else:
            values = values.astype(np.float64)
            bad = np.flatnonzero(~np.isfinite(values))
            if bad.size:
                raise DataError(f"column {self.name!r}, row {int(bad[0])}: non-finite value")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def cardinality(self) -> int:
        if self.kind != DISCRETE:
            raise ContractError("cardinality is defined for discrete columns only")
        return int(self.values.max()) + 1 if self.values.size else 0


@dataclass(frozen=True)
class FeatureTable:
    """N samples by n named feature columns."""

    columns: tuple[FeatureColumn, ...]

    def __post_init__(self):
        cols = tuple(self.columns)
        object.__setattr__(self, "columns", cols)
        if not cols:
            raise DataError("a feature table needs at least one column")
        n_rows = {len(c.values) for c in cols}
        if len(n_rows) != 1:
            raise DataError(f"columns have differing lengths: {sorted(n_rows)}")
        if n_rows.pop() < 1:
            raise DataError("a feature table needs at least one sample")
        names = [c.name for c in cols]
        if len(set(names)) != len(names):
            dup = next(n for n in names if names.count(n) > 1)
            raise DataError(f"duplicate feature name {dup!r}")

    @classmethod
    def from_arrays(cls, arrays: Mapping[str, np.ndarray], kinds: Mapping[str, str] | None = None) -> "FeatureTable":
        """Build a table; columns with integer dtype default to discrete."""
        kinds = dict(kinds or {})
        cols = []
        for name, values in arrays.items():
            values = np.asarray(values)
            kind = kinds.get(name, DISCRETE if np.issubdtype(values.dtype, np.integer) else CONTINUOUS)
            cols.append(FeatureColumn(name, values, kind))
        return cls(tuple(cols))

    @property
    def n_samples(self) -> int:
        return len(self.columns[0].values)

    @property
    def n_features(self) -> int:
        return len(self.columns)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DataError(f"unknown feature {name!r}") from None

    def replace(self, index: int, column: FeatureColumn) -> "FeatureTable":
        cols = list(self.columns)
        cols[index] = column
        return FeatureTable(tuple(cols))

    def equals(self, other: "FeatureTable") -> bool:
        if self.names != other.names:
            return False
        return all(
            a.kind == b.kind and a.values.dtype == b.values.dtype and np.array_equal(a.values, b.values)
            for a, b in zip(self.columns, other.columns)
        )


@dataclass(frozen=True)
class AttributeVector:
    """Per-sample integer class codes in ``[0, cardinality)``."""

    labels: np.ndarray
    cardinality: int = 0
    name: str = ""

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise DataError("attribute labels must be one-dimensional")
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            raise DataError("attribute labels must be integer class codes")
        labels = labels.astype(np.int64)
        labels.setflags(write=False)
        card = self.cardinality or (int(labels.max()) + 1 if labels.size else 1)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "cardinality", int(card))
        if self.cardinality < 1:
            raise DataError("attribute cardinality must be at least 1")
        if labels.size and (labels.min() < 0 or labels.max() >= self.cardinality):
            raise DataError(f"attribute {self.name or '<unnamed>'}: class codes must lie in [0, {self.cardinality})")

    def __len__(self) -> int:
        return len(self.labels)


def canonical_subset(indices: Iterable[int]) -> tuple[int, ...]:
    """Sorted, duplicate-free tuple form of a feature subset."""
    subset = tuple(sorted(int(i) for i in indices))
    if len(set(subset)) != len(subset):
        raise ContractError(f"feature subset has duplicates: {subset}")
    return subset


def check_subset(subset: Sequence[int], n: int) -> tuple[int, ...]:
    subset = canonical_subset(subset)
    if subset and (subset[0] < 0 or subset[-1] >= n):
        raise ContractError(f"feature subset {subset} out of range for {n} features")
    return subset


@dataclass(frozen=True)
class RandomSource:
    """Seeded PCG64 stream; children are addressed by integer keys.

    Two sources with equal ``seed`` and ``stream`` produce identical draws on
    every platform numpy supports, which is what makes reports reproducible.
    """

    seed: int
    stream: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ContractError("seed must be a 64-bit unsigned integer")
        if any(k < 0 for k in self.stream):
            raise ContractError("stream keys must be nonnegative")

    algorithm = PRNG_ALGORITHM

    def child(self, *keys: int) -> "RandomSource":
        return RandomSource(self.seed, self.stream + tuple(int(k) for k in keys))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.seed), spawn_key=self.stream)
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class AnalysisConfig:
    """Settings shared by the estimation pipelines.

    ``epsilon`` is in bits. ``protectability_threshold`` is the operator's
    cut-off for calling a stream protectable; it is reported, never used to
    alter a score.
    """

    epsilon: float = 0.05
    m_samples: int = 100
    bins: int = 16
    estimator: str = "mi"
    sampler: str = "unbiased"
    degenerate_tolerance: float = 1e-9
    protectability_threshold: float = 0.7
    seed: int = 0
    loss: str = "cross_entropy"
    exact_limit: int = 16
    threads: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ContractError("epsilon must be a nonnegative real")
        if self.m_samples < 1:
            raise ContractError("m_samples must be positive")
        if self.bins < 1:
            raise ContractError("bins must be positive")
        if self.estimator not in ESTIMATORS:
            raise ContractError(f"estimator must be one of {ESTIMATORS}")
        if self.sampler not in SAMPLERS:
            raise ContractError(f"sampler must be one of {SAMPLERS}")
        if not self.degenerate_tolerance > 0:
            raise ContractError("degenerate_tolerance must be positive")
        if not 0.0 <= self.protectability_threshold <= 1.0:
            raise ContractError("protectability_threshold must lie in [0, 1]")
        if self.loss not in ("cross_entropy", "mse"):
            raise ContractError("loss must be cross_entropy or mse")
        if self.threads < 0:
            raise ContractError("threads must be >= 0")
        RandomSource(self.seed)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "threads"}


def validate_pair(table: FeatureTable, attr: AttributeVector) -> None:
    if len(attr) != table.n_samples:
        raise DataError(f"attribute has {len(attr)} labels but the table has {table.n_samples} rows")
    labels = attr.labels
    if labels.size and (labels.min() < 0 or labels.max() >= attr.cardinality):
        raise DataError(f"class code outside [0, {attr.cardinality})")


# --- CSV ingestion -----------------------------------------------------------

ROLES = ("feature", "task", "private")


def parse_schema(text: str) -> dict[str, str]:
    """Parse ``task=<col>,private=<col>[,feature=<col>...]`` into column -> role."""
    schema: dict[str, str] = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        role, sep, col = part.partition("=")
        role, col = role.strip(), col.strip()
        if not sep or role not in ROLES or not col:
            raise DataError(f"bad schema entry {part!r}; expected role=column with role in {ROLES}")
        schema[col] = role
    return schema


def _is_int(text: str) -> bool:
    try:
        int(text)
    except ValueError:
        return False
    return True


def _encode_column(name: str, raw: list[str], discrete_only: bool) -> tuple[np.ndarray, str]:
    if all(_is_int(v) for v in raw):
        ints = np.array([int(v) for v in raw], dtype=np.int64)
        uniq = np.unique(ints)
        return np.searchsorted(uniq, ints).astype(np.int64), DISCRETE
    floats = []
    for row, v in enumerate(raw):
        try:
            x = float(v)
        except ValueError:
            break
        if not math.isfinite(x):
            raise DataError(f"row {row + 2}, column {name!r}: non-finite value {v!r}")
        floats.append(x)
    else:
        if discrete_only:
            raise DataError(f"column {name!r}: attribute columns must hold class labels, not reals")
        return np.array(floats, dtype=np.float64), CONTINUOUS
    # categorical strings, coded by first appearance
    codes: dict[str, int] = {}
    return np.array([codes.setdefault(v, len(codes)) for v in raw], dtype=np.int64), DISCRETE


def load_table(path: str | Path, schema: Mapping[str, str] | str) -> tuple[FeatureTable, AttributeVector, AttributeVector]:
    """Read a CSV into a feature table plus task and private attribute vectors.

    ``schema`` maps column names to roles. Columns not named in the schema are
    features. Integer columns are recoded to ``0..k-1`` by sorted value;
    string columns by order of first appearance.
    """
    if isinstance(schema, str):
        schema = parse_schema(schema)
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or not any(c.strip() for c in rows[0]):
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise DataError(f"{path}: header only, no samples")
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(f"{path}, row {lineno}: expected {len(header)} cells, got {len(row)}")
        for col, cell in zip(header, row):
            if cell.strip() == "":
                raise DataError(f"{path}, row {lineno}, column {col!r}: missing value")
            if cell.strip().lower() in ("nan", "inf", "-inf", "+inf", "infinity", "-infinity"):
                raise DataError(f"{path}, row {lineno}, column {col!r}: non-finite value {cell!r}")

    unknown = [c for c in schema if c not in header]
    if unknown:
        raise DataError(f"schema names unknown column(s): {', '.join(unknown)}")
    tasks = [c for c, r in schema.items() if r == "task"]
    privs = [c for c, r in schema.items() if r == "private"]
    if len(tasks) != 1 or len(privs) != 1:
        raise DataError("schema must name exactly one task column and one private column")

    columns, attrs = [], {}
    for j, name in enumerate(header):
        raw = [row[j].strip() for row in body]
        role = schema.get(name, "feature")
        values, kind = _encode_column(name, raw, discrete_only=role != "feature")
        if role == "feature":
            columns.append(FeatureColumn(name, values, kind))
        else:
            attrs[role] = AttributeVector(values, int(values.max()) + 1, name=name)
    if not columns:
        raise DataError("schema leaves no feature columns")
    table = FeatureTable(tuple(columns))
    for attr in attrs.values():
        validate_pair(table, attr)
    return table, attrs["task"], attrs["private"]


def save_table(path: str | Path, table: FeatureTable, task: AttributeVector, private: AttributeVector,
               task_name: str = "ya", private_name: str = "ypri") -> None:
    """Write the CSV layout ``load_table`` reads; floats use ``repr`` so they round-trip."""
    validate_pair(table, task)
    validate_pair(table, private)
    header = table.names + [task_name, private_name]
    cols = [
        [repr(float(v)) for v in c.values] if c.kind == CONTINUOUS else [str(int(v)) for v in c.values]
        for c in table.columns
    ]
    cols.append([str(int(v)) for v in task.labels])
    cols.append([str(int(v)) for v in private.labels])
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(zip(*cols))
