"""Synthetic tables with known dependence between features and attributes.

Families:

* ``xor``: z1, z2 fair bits, task = z1 xor z2, private independent of both.
  ``n_samples=4`` gives the exhaustive truth table with a constant private label.
* ``copy``: z1 fair bit, z2 independent noise, task = private = z1.
* ``overlap``: the protectability sweep family, see :func:`overlap`.
* ``gaussian_mix``: continuous features whose class-conditional means depend on
  the task label (first half) or the private label (second half).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .core import AttributeVector, ContractError, FeatureColumn, FeatureTable, RandomSource, save_table

FAMILIES = ("xor", "copy", "overlap", "gaussian_mix")

# flip probability of the first task-informative feature; later ones get
# progressively noisier so no two carry the same amount of task signal
_TASK_FLIP_BASE = 0.10
_TASK_FLIP_STEP = 0.05
_PRIVATE_FLIP = 0.10


@dataclass(frozen=True)
class GeneratorSpec:
    family: str = "overlap"
    n_samples: int = 20000
    seed: int = 7
    rho: float = 0.5
    n_task: int = 4
    n_private: int = 2
    n_noise: int = 2
    n_features: int = 4

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ContractError(f"family must be one of {FAMILIES}")
        if self.n_samples < 1:
            raise ContractError("n_samples must be positive")
        if not 0.0 <= self.rho <= 1.0:
            raise ContractError("rho must lie in [0, 1]")
        if min(self.n_task, self.n_private, self.n_noise) < 0:
            raise ContractError("feature counts must be nonnegative")
        if self.family == "overlap" and self.n_task + self.n_private + self.n_noise < 1:
            raise ContractError("overlap tables need at least one feature")
        if self.family == "gaussian_mix" and self.n_features < 1:
            raise ContractError("gaussian_mix needs at least one feature")

    @property
    def n_shared(self) -> int:
        """Task-informative features that also carry the private label."""
        return int(round(self.rho * self.n_task))


@dataclass(frozen=True)
class Dataset:
    table: FeatureTable
    task: AttributeVector
    private: AttributeVector
    spec: GeneratorSpec
    truth: dict

    @property
    def unprotectable(self) -> list[int]:
        return [self.table.index_of(n) for n in self.truth.get("private_informative", [])]


def _flip(gen: np.random.Generator, bits: np.ndarray, p: float) -> np.ndarray:
    return bits ^ (gen.random(len(bits)) < p).astype(np.int64)


def _bits(gen: np.random.Generator, n: int) -> np.ndarray:
    return gen.integers(0, 2, size=n).astype(np.int64)


def xor(spec: GeneratorSpec) -> Dataset:
    if spec.n_samples == 4:
        z1 = np.array([0, 0, 1, 1])
        z2 = np.array([0, 1, 0, 1])
        priv = np.zeros(4, dtype=np.int64)
    else:
        gen = RandomSource(spec.seed).generator()
        z1, z2, priv = _bits(gen, spec.n_samples), _bits(gen, spec.n_samples), _bits(gen, spec.n_samples)
    table = FeatureTable.from_arrays({"z1": z1, "z2": z2})
    truth = {"task_informative": ["z1", "z2"], "private_informative": []}
    return Dataset(table, AttributeVector(z1 ^ z2, 2, "ya"), AttributeVector(priv, 1 if spec.n_samples == 4 else 2, "ypri"),
                   spec, truth)


def copy(spec: GeneratorSpec) -> Dataset:
    gen = RandomSource(spec.seed).generator()
    z1, z2 = _bits(gen, spec.n_samples), _bits(gen, spec.n_samples)
    table = FeatureTable.from_arrays({"z1": z1, "z2": z2})
    truth = {"task_informative": ["z1"], "private_informative": ["z1"]}
    return Dataset(table, AttributeVector(z1, 2, "ya"), AttributeVector(z1.copy(), 2, "ypri"), spec, truth)


def overlap(spec: GeneratorSpec) -> Dataset:
    """Binary task and private labels, independent fair bits.

    Column layout: task-only features, noise bits, shared features, then
    private-only features. Task-informative feature j is the task label with
    flip probability ``0.10 + 0.05 j``; the first ``round(rho * n_task)`` of
    them are shared and additionally encode a noisy private bit
    (code = 2 * task_bit + private_bit). Private-only features copy the
    private label with flip probability 0.10.
    """
    gen = RandomSource(spec.seed).generator()
    n = spec.n_samples
    y_task, y_priv = _bits(gen, n), _bits(gen, n)
    n_shared = spec.n_shared

    task_bits = [_flip(gen, y_task, _TASK_FLIP_BASE + _TASK_FLIP_STEP * j) for j in range(spec.n_task)]
    # the cleanest task copies are the shared ones, so what survives pruning
    # the private-informative features gets strictly worse as rho grows
    shared = [2 * task_bits[j] + _flip(gen, y_priv, _PRIVATE_FLIP) for j in range(n_shared)]
    task_only = task_bits[n_shared:]
    private = [_flip(gen, y_priv, _PRIVATE_FLIP) for _ in range(spec.n_private)]
    noise = [_bits(gen, n) for _ in range(spec.n_noise)]

    groups = [("task_only", task_only), ("noise", noise), ("shared", shared), ("private_only", private)]
    arrays, roles = {}, {}
    for role, cols in groups:
        for values in cols:
            name = f"z{len(arrays) + 1}"
            arrays[name] = values
            roles[name] = role
    table = FeatureTable.from_arrays(arrays)
    truth = {
        "roles": roles,
        "task_informative": [k for k, r in roles.items() if r in ("task_only", "shared")],
        "private_informative": [k for k, r in roles.items() if r in ("shared", "private_only")],
        "n_shared": n_shared,
    }
    return Dataset(table, AttributeVector(y_task, 2, "ya"), AttributeVector(y_priv, 2, "ypri"), spec, truth)


def gaussian_mix(spec: GeneratorSpec) -> Dataset:
    gen = RandomSource(spec.seed).generator()
    n, k = spec.n_samples, spec.n_features
    y_task, y_priv = _bits(gen, n), _bits(gen, n)
    half = (k + 1) // 2
    arrays = {}
    for j in range(k):
        label = y_task if j < half else y_priv
        arrays[f"z{j + 1}"] = gen.normal(loc=1.5 * label, scale=1.0)
    table = FeatureTable.from_arrays(arrays)
    truth = {"task_informative": [f"z{j + 1}" for j in range(half)],
             "private_informative": [f"z{j + 1}" for j in range(half, k)]}
    return Dataset(table, AttributeVector(y_task, 2, "ya"), AttributeVector(y_priv, 2, "ypri"), spec, truth)


_BUILDERS = {"xor": xor, "copy": copy, "overlap": overlap, "gaussian_mix": gaussian_mix}


def generate(spec: GeneratorSpec) -> Dataset:
    return _BUILDERS[spec.family](spec)


def write_dataset(ds: Dataset, out: str | Path) -> tuple[Path, Path]:
    """Write ``<out>`` as CSV and ``<out minus suffix>.json`` with the generating parameters."""
    out = Path(out)
    save_table(out, ds.table, ds.task, ds.private)
    sidecar = out.with_suffix(".json")
    meta = {"generator": asdict(ds.spec), "n_shared": ds.spec.n_shared, "schema": {"task": "ya", "private": "ypri"},
            "truth": ds.truth}
    sidecar.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return out, sidecar
