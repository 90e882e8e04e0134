"""Closed-form transmission coefficients and sparse tensor assembly.

The expected per-axis cosines of the transmission error are quadratic forms
in the sender amplitudes a_{jm} and the fiducial amplitudes b_{jm}; their
coefficients come in two closed-form families:

* g: couples equal magnetic numbers (m = n, r = s) and scores the z axis
  through <cos beta>;
* h: couples raised magnetic numbers (m = n - 1, r = s - 1, plus the mirrored
  pattern) and scores the x and y axes together through
  <(1 + cos beta) cos(alpha + gamma)>.

Both vanish outside |j - k| <= 1. The assembled tensors are validated
entrywise against the brute-force quadrature oracle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from types import MappingProxyType

import numpy as np

from .basis import flat_index


@dataclass(frozen=True)
class Objective:
    """Which axes to optimize: weights on the z term and on the joint xy term."""

    kind: str
    w_z: float
    w_xy: float

    _KINDS = ("z", "xy", "xyz", "weighted")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.w_z < 0 or self.w_xy < 0 or (self.w_z == 0 and self.w_xy == 0):
            raise ValueError("objective weights must be non-negative and not all zero")

    @classmethod
    def z_axis(cls) -> "Objective":
        return cls("z", 1.0, 0.0)

    @classmethod
    def xy_axes(cls) -> "Objective":
        return cls("xy", 0.0, 1.0)

    @classmethod
    def xyz_axes(cls) -> "Objective":
        return cls("xyz", 1.0, 1.0)

    @classmethod
    def weighted(cls, w_z: float, w_xy: float) -> "Objective":
        return cls("weighted", float(w_z), float(w_xy))

    @classmethod
    def from_kind(cls, kind: str, w_z: float | None = None, w_xy: float | None = None) -> "Objective":
        if kind == "weighted":
            return cls.weighted(w_z if w_z is not None else 1.0, w_xy if w_xy is not None else 1.0)
        return {"z": cls.z_axis, "xy": cls.xy_axes, "xyz": cls.xyz_axes}[kind]()

    @property
    def axis_count(self) -> int:
        """Number of axes being optimized (weighted counts axes with weight > 0)."""
        if self.kind == "z":
            return 1
        if self.kind == "xy":
            return 2
        if self.kind == "xyz":
            return 3
        return (1 if self.w_z > 0 else 0) + (2 if self.w_xy > 0 else 0)

    def to_json(self) -> dict:
        return {"kind": self.kind, "w_z": self.w_z, "w_xy": self.w_xy}

    @classmethod
    def from_json(cls, doc: dict) -> "Objective":
        return cls(doc["kind"], float(doc["w_z"]), float(doc["w_xy"]))


def g_element(j: int, k: int, n: int, s: int) -> float:
    """Equal-m coupling between blocks j and k at magnetic numbers (n, s).

    Diagonal blocks give n s / (j (j+1)) (zero at j = 0, where the Haar
    average of cos beta against the trivial block vanishes); adjacent blocks
    give sqrt((J^2-n^2)(J^2-s^2) / (4J^2-1)) / J with J the larger index.
    Zero outside |j - k| <= 1, and zero at |n| = J or |s| = J where the
    radicand vanishes (those indices do not fit the smaller block).
    """
    hi = max(j, k)
    if abs(n) > hi or abs(s) > hi:
        raise ValueError(f"magnetic index out of range for blocks ({j}, {k})")
    if j == k:
        if j == 0:
            return 0.0
        return n * s / (j * (j + 1))
    if abs(j - k) != 1:
        return 0.0
    rad = (hi * hi - n * n) * (hi * hi - s * s)
    if rad <= 0:
        return 0.0
    return math.sqrt(rad / (4 * hi * hi - 1)) / hi


def h_element(j: int, k: int, n: int, s: int) -> float:
    """Raising-pattern coupling h_{jk}(n, s), row block j, column block k.

    (n, s) are the column-side magnetic numbers; the row side sits at
    (n - 1, s - 1). The h matrix is not symmetric on its own; symmetry is
    restored in the assembled tensor by the mirrored lowering pattern.
    Zero outside |j - k| <= 1 or wherever a factor under the root vanishes,
    which covers every index that does not fit the smaller block.
    """
    if abs(n) > max(j, k) or abs(s) > max(j, k):
        raise ValueError(f"magnetic index out of range for blocks ({j}, {k})")
    if j == k:
        if j == 0:
            return 0.0
        rad = (j - n + 1) * (j + n) * (j - s + 1) * (j + s)
        return math.sqrt(rad) / (2 * j * (j + 1)) if rad > 0 else 0.0
    if j == k + 1:
        rad = (j - n + 1) * (j - n) * (j - s + 1) * (j - s)
        return math.sqrt(rad) / (2 * j * math.sqrt(4 * j * j - 1)) if rad > 0 else 0.0
    if k == j + 1:
        rad = (k + n - 1) * (k + n) * (k + s - 1) * (k + s)
        return math.sqrt(rad) / (2 * k * math.sqrt(4 * k * k - 1)) if rad > 0 else 0.0
    return 0.0


@dataclass(frozen=True)
class SparseCoefficientTensor:
    """Nonzero transmission coefficients keyed by (j, k, m, n, r, s).

    Entries stay within |j - k| <= 1 and satisfy the Hermitian symmetry
    entry(j,k,m,n,r,s) = conj(entry(k,j,n,m,s,r)). Tensors assembled from the
    closed-form families additionally obey their delta patterns and are real;
    quadrature-derived rotation-entry tensors (objective=None) may carry
    imaginary parts.
    """

    j_max: int
    objective: Objective | None
    entries: dict

    def __post_init__(self):
        # instances are shared through the assembly cache; freeze the mapping
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    @cached_property
    def _index_arrays(self):
        """Precomputed flat-index arrays for fast quadratic-form assembly."""
        vals = np.array(list(self.entries.values()))
        rows = np.array([flat_index(j, m) for j, _, m, _, _, _ in self.entries], dtype=np.intp)
        cols = np.array([flat_index(k, n) for _, k, _, n, _, _ in self.entries], dtype=np.intp)
        b_rows = np.array([flat_index(j, r) for j, _, _, _, r, _ in self.entries], dtype=np.intp)
        b_cols = np.array([flat_index(k, s) for _, k, _, _, _, s in self.entries], dtype=np.intp)
        return vals, rows, cols, b_rows, b_cols

    def to_json(self) -> dict:
        if any(isinstance(v, complex) for v in self.entries.values()):
            raise ValueError("only real-valued tensors serialize to JSON")
        entries = [[*key, val] for key, val in sorted(self.entries.items())]
        objective = self.objective.to_json() if self.objective is not None else None
        return {"j_max": self.j_max, "objective": objective, "entries": entries}

    @classmethod
    def from_json(cls, doc: dict) -> "SparseCoefficientTensor":
        entries = {tuple(int(i) for i in row[:6]): float(row[6]) for row in doc["entries"]}
        objective = Objective.from_json(doc["objective"]) if doc["objective"] else None
        return cls(int(doc["j_max"]), objective, entries)

    def dump(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "SparseCoefficientTensor":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def _add(entries: dict, key: tuple, value: float) -> None:
    if value == 0.0:
        return
    entries[key] = entries.get(key, 0.0) + value


def _g_pattern(j_max: int, weight: float, entries: dict) -> None:
    for j in range(j_max + 1):
        for k in range(max(0, j - 1), min(j_max, j + 1) + 1):
            lo = min(j, k)
            for m in range(-lo, lo + 1):
                for r in range(-lo, lo + 1):
                    _add(entries, (j, k, m, m, r, r), weight * g_element(j, k, m, r))


def _h_pattern(j_max: int, weight: float, entries: dict) -> None:
    # raising pattern (m = n-1, r = s-1) plus its mirrored partner, which
    # together restore the Hermitian symmetry of the tensor
    for j in range(j_max + 1):
        for k in range(max(0, j - 1), min(j_max, j + 1) + 1):
            for n in range(-k, k + 1):
                if abs(n - 1) > j:
                    continue
                for s in range(-k, k + 1):
                    if abs(s - 1) > j:
                        continue
                    val = weight * h_element(j, k, n, s)
                    _add(entries, (j, k, n - 1, n, s - 1, s), val)
                    _add(entries, (k, j, n, n - 1, s, s - 1), val)


def assemble_tensor(objective: Objective, j_max: int) -> SparseCoefficientTensor:
    """Sparse coefficient tensor for the requested objective at block cutoff j_max."""
    if j_max < 0:
        raise ValueError("j_max must be non-negative")
    entries: dict = {}
    if objective.w_z:
        _g_pattern(j_max, objective.w_z, entries)
    if objective.w_xy:
        _h_pattern(j_max, objective.w_xy, entries)
    return SparseCoefficientTensor(j_max, objective, entries)


@lru_cache(maxsize=64)
def cached_tensor(objective: Objective, j_max: int) -> SparseCoefficientTensor:
    """Memoized assembly; tensors are immutable so sharing is safe."""
    return assemble_tensor(objective, j_max)
