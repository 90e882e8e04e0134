"""Reduction of weighted direction sets to three orthogonal axes.

Transmitting any weighted set of directions scores as a contraction of the
expected classical rotation matrix with the set's second-moment matrix; that
matrix diagonalizes into three orthogonal axes with non-negative weights, so
nothing beyond the weighted three-axis problem ever arises.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .coefficients import Objective, SparseCoefficientTensor, cached_tensor
from .objective import AliceState, FiducialState, build_m, expected_value
from .quadrature import coefficient_block, make_grid
from .so3 import rotation_matrix_components

OFFDIAG_TOL = 1e-12


@dataclass(frozen=True)
class WeightedVectorSet:
    """Unit direction vectors with positive importance weights."""

    vectors: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        vecs = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        wts = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if vecs.shape[0] == 0:
            raise ValueError("vector set must be non-empty")
        if vecs.shape[1] != 3 or wts.shape[0] != vecs.shape[0]:
            raise ValueError("need one 3-vector per weight")
        if np.any(np.abs(np.linalg.norm(vecs, axis=1) - 1.0) > 1e-12):
            raise ValueError("all vectors must be unit length within 1e-12")
        if np.any(wts <= 0.0):
            raise ValueError("weights must be positive")
        vecs.flags.writeable = False
        wts.flags.writeable = False
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "weights", wts)

    @classmethod
    def from_json(cls, doc: dict) -> "WeightedVectorSet":
        return cls(np.asarray(doc["vectors"], dtype=float), np.asarray(doc["weights"], dtype=float))

    @classmethod
    def load(cls, path) -> "WeightedVectorSet":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))

    def to_json(self) -> dict:
        return {"vectors": self.vectors.tolist(), "weights": self.weights.tolist()}


@dataclass(frozen=True)
class GramLikeMatrix:
    """Symmetric positive-semidefinite 3x3 second-moment matrix."""

    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if c.shape != (3, 3):
            raise ValueError("expected a 3x3 matrix")
        if np.max(np.abs(c - c.T)) > 1e-14:
            raise ValueError("matrix must be symmetric within 1e-14")
        if np.linalg.eigvalsh(c)[0] < -1e-12:
            raise ValueError("matrix must be positive semidefinite")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "c", c)


def build_c(vector_set: WeightedVectorSet) -> GramLikeMatrix:
    """Weighted second-moment matrix sum of w e e^T over the set."""
    c = np.einsum("u,um,un->mn", vector_set.weights, vector_set.vectors, vector_set.vectors)
    return GramLikeMatrix(0.5 * (c + c.T))


def reduce_to_axes(gram: GramLikeMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal axes (rows) and weights reconstructing the moment matrix.

    Weights come out descending; each axis is sign-fixed so its
    largest-magnitude component is positive, and ties between equal weights
    are broken by putting the axis leaning on the earliest coordinate first.
    """
    evals, evecs = np.linalg.eigh(gram.c)
    order = np.argsort(evals)[::-1]
    axes = evecs[:, order].T.copy()
    weights = np.clip(evals[order], 0.0, None)
    for i in range(3):
        pivot = int(np.argmax(np.abs(axes[i])))
        if axes[i, pivot] < 0:
            axes[i] = -axes[i]
    tie_tol = 1e-12 * max(1.0, float(weights[0]))
    start = 0
    while start < 3:
        stop = start + 1
        while stop < 3 and weights[start] - weights[stop] <= tie_tol:
            stop += 1
        if stop - start > 1:
            cluster = sorted(range(start, stop), key=lambda i: int(np.argmax(np.abs(axes[i]))))
            axes[start:stop] = axes[cluster]
        start = stop
    return axes, weights


@lru_cache(maxsize=None)
def rotation_entry_tensor(row: int, col: int, j_max: int) -> SparseCoefficientTensor:
    """Coefficient tensor of one classical rotation-matrix entry, by quadrature.

    Only the diagonal z entry and the combined xy diagonal have closed forms,
    so generic entries are integrated numerically on an exact grid and cached.
    """
    if not (0 <= row < 3 and 0 <= col < 3):
        raise ValueError("rotation entries are indexed 0..2")

    def entry_fn(alphas, betas, gammas):
        return rotation_matrix_components(alphas, betas, gammas)[..., row, col]

    grid = make_grid(j_max)
    entries: dict = {}
    for j in range(j_max + 1):
        for k in range(max(0, j - 1), min(j_max, j + 1) + 1):
            block = coefficient_block(entry_fn, j, k, grid)
            for mi in range(2 * j + 1):
                for ri in range(2 * j + 1):
                    for ni in range(2 * k + 1):
                        for si in range(2 * k + 1):
                            val = complex(block[mi, ri, ni, si])
                            if abs(val) > 1e-13:
                                # off-axis entries carry imaginary Fourier weights
                                if abs(val.imag) < 1e-13:
                                    val = val.real
                                entries[(j, k, mi - j, ni - k, ri - j, si - k)] = val
    return SparseCoefficientTensor(j_max, None, entries)


def weighted_objective_expectation(a: AliceState, b: FiducialState,
                                   gram: GramLikeMatrix) -> float:
    """Expected weighted sum of direction cosines for the moment matrix.

    Diagonal matrices with equal x and y weights use the closed-form tensors;
    anything else contracts the quadrature-derived rotation-entry tensors.
    """
    if a.n != b.n:
        raise ValueError("state dimensions differ")
    c = gram.c
    j_max = a.n - 1
    off_diag = np.max(np.abs(c - np.diag(np.diag(c))))
    if off_diag <= OFFDIAG_TOL and abs(c[0, 0] - c[1, 1]) <= OFFDIAG_TOL:
        total = 0.0
        if abs(c[2, 2]) > 0.0:
            z_mat = build_m(cached_tensor(Objective.z_axis(), j_max), b)
            total += c[2, 2] * expected_value(z_mat, a)
        if abs(c[0, 0]) > 0.0:
            xy_mat = build_m(cached_tensor(Objective.xy_axes(), j_max), b)
            total += c[0, 0] * expected_value(xy_mat, a)
        return total
    total = 0.0
    for row in range(3):
        for col in range(3):
            if abs(c[row, col]) > 0.0:
                tensor = rotation_entry_tensor(row, col, j_max)
                total += c[row, col] * expected_value(build_m(tensor, b), a)
    return total
