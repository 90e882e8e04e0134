"""Signal and fiducial states, the induced Hermitian form, and error reports.

The expected value of any transmission objective is <A|M|A> where M is built
from the coefficient tensor and the fiducial amplitudes. Per-axis mean square
errors follow from the expected cosines as (1 - <cos w>)/2 per axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import block_slice, flat_index, iter_jm, total_dim
from .coefficients import Objective, SparseCoefficientTensor, cached_tensor
from .so3 import AngularIndex

NORM_TOL = 1e-12


def _as_state_vector(n: int, coefficients) -> np.ndarray:
    vec = np.asarray(coefficients, dtype=complex).reshape(-1)
    if vec.size != total_dim(n):
        raise ValueError(f"expected {total_dim(n)} coefficients for n={n}, got {vec.size}")
    vec = vec.copy()
    vec.flags.writeable = False
    return vec


def _coeff_rows(vec: np.ndarray, n: int) -> list:
    return [[j, m, float(vec[flat_index(j, m)].real), float(vec[flat_index(j, m)].imag)]
            for j, m in iter_jm(n)]


def _vec_from_rows(n: int, rows) -> np.ndarray:
    vec = np.zeros(total_dim(n), dtype=complex)
    for j, m, re, im in rows:
        index = AngularIndex(int(j), int(m))
        if index.j >= n:
            raise ValueError(f"coefficient block j={index.j} exceeds n-1={n - 1}")
        vec[flat_index(index.j, index.m)] = re + 1j * im
    return vec


@dataclass(frozen=True)
class AliceState:
    """Sender amplitudes a_{jm} over the full level, unit total norm."""

    n: int
    a: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        vec = _as_state_vector(self.n, self.a)
        if abs(np.linalg.norm(vec) - 1.0) > NORM_TOL:
            raise ValueError("signal amplitudes must have unit total norm")
        object.__setattr__(self, "a", vec)

    @classmethod
    def from_coefficients(cls, n: int, coefficients) -> "AliceState":
        return cls(n, coefficients)

    def block(self, j: int) -> np.ndarray:
        return self.a[block_slice(j)]

    def to_json(self) -> dict:
        return {"n": self.n, "coefficients": _coeff_rows(self.a, self.n)}

    @classmethod
    def from_json(cls, doc: dict) -> "AliceState":
        n = int(doc["n"])
        return cls(n, _vec_from_rows(n, doc["coefficients"]))


@dataclass(frozen=True)
class FiducialState:
    """Detector fiducial amplitudes b_{jm}, unit norm within every j block.

    uniform_filled_blocks records blocks that were set to the uniform vector
    because the source amplitudes carried no weight there.
    """

    n: int
    b: np.ndarray
    uniform_filled_blocks: tuple = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        vec = _as_state_vector(self.n, self.b)
        for j in range(self.n):
            if abs(np.linalg.norm(vec[block_slice(j)]) - 1.0) > NORM_TOL:
                raise ValueError(f"fiducial block j={j} is not unit-normalized")
        object.__setattr__(self, "b", vec)
        object.__setattr__(self, "uniform_filled_blocks", tuple(self.uniform_filled_blocks))

    @classmethod
    def uniform(cls, n: int) -> "FiducialState":
        vec = np.zeros(total_dim(n), dtype=complex)
        for j in range(n):
            vec[block_slice(j)] = 1.0 / np.sqrt(2 * j + 1)
        return cls(n, vec)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "FiducialState":
        raw = rng.standard_normal(total_dim(n)) + 1j * rng.standard_normal(total_dim(n))
        vec = np.empty_like(raw)
        for j in range(n):
            sl = block_slice(j)
            vec[sl] = raw[sl] / np.linalg.norm(raw[sl])
        return cls(n, vec)

    def block(self, j: int) -> np.ndarray:
        return self.b[block_slice(j)]

    def to_json(self) -> dict:
        return {"n": self.n, "coefficients": _coeff_rows(self.b, self.n)}

    @classmethod
    def from_json(cls, doc: dict) -> "FiducialState":
        n = int(doc["n"])
        return cls(n, _vec_from_rows(n, doc["coefficients"]))


@dataclass(frozen=True)
class ObjectiveMatrix:
    """Dense Hermitian matrix of the objective quadratic form, indexed by (j, m)."""

    n: int
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        d = total_dim(self.n)
        if mat.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix for n={self.n}")
        if np.max(np.abs(mat - mat.conj().T)) > 1e-12:
            raise ValueError("objective matrix must be Hermitian within 1e-12")
        mat = mat.copy()
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)


@dataclass(frozen=True)
class FidelityReport:
    """Expected error cosines and the per-axis mean square error.

    expect_cos_xy is the x and y contributions combined; mse_per_axis averages
    (1 - <cos w>)/2 over the axes the active objective optimizes. lam is the
    active objective's expectation value.
    """

    expect_cos_z: float
    expect_cos_xy: float
    expect_cos_sum: float
    mse_per_axis: float
    lam: float

    def to_json(self) -> dict:
        return {
            "expect_cos_z": self.expect_cos_z,
            "expect_cos_xy": self.expect_cos_xy,
            "expect_cos_sum": self.expect_cos_sum,
            "mse_per_axis": self.mse_per_axis,
            "lambda": self.lam,
        }


def build_m(tensor: SparseCoefficientTensor, b: FiducialState) -> ObjectiveMatrix:
    """Contract the coefficient tensor with the fiducial amplitudes.

    M[(j,m),(k,n)] = sum over (r,s) of f_{jkmnrs} b_{jr} conj(b_{ks}); the
    tensor's index symmetry makes the result Hermitian for any b.
    """
    if tensor.j_max != b.n - 1:
        raise ValueError(f"tensor j_max={tensor.j_max} does not match state n={b.n}")
    d = total_dim(b.n)
    vals, rows, cols, b_rows, b_cols = tensor._index_arrays
    mat = np.zeros((d, d), dtype=complex)
    if vals.size:
        np.add.at(mat, (rows, cols), vals * b.b[b_rows] * np.conj(b.b[b_cols]))
    mat = 0.5 * (mat + mat.conj().T)
    return ObjectiveMatrix(b.n, mat)


def expected_value(m: ObjectiveMatrix, a: AliceState) -> float:
    """Real quadratic form value <A|M|A>."""
    if m.n != a.n:
        raise ValueError(f"matrix n={m.n} does not match state n={a.n}")
    val = np.vdot(a.a, m.matrix @ a.a)
    return float(val.real)


def mse_per_axis_from_lambda(lam: float, objective: Objective) -> float:
    """Average of (1 - <cos w>)/2 over the K axes the objective optimizes."""
    k = objective.axis_count
    return (k - lam) / (2 * k)


def fidelity_report(a: AliceState, b: FiducialState,
                    objective: Objective = Objective.xyz_axes()) -> FidelityReport:
    """Expected cosines of the state pair, scored under the given objective."""
    if a.n != b.n:
        raise ValueError("state dimensions differ")
    j_max = a.n - 1
    cos_z = expected_value(build_m(cached_tensor(Objective.z_axis(), j_max), b), a)
    cos_xy = expected_value(build_m(cached_tensor(Objective.xy_axes(), j_max), b), a)
    lam = objective.w_z * cos_z + objective.w_xy * cos_xy
    k = objective.axis_count
    active = (cos_z if objective.w_z > 0 else 0.0) + (cos_xy if objective.w_xy > 0 else 0.0)
    return FidelityReport(
        expect_cos_z=cos_z,
        expect_cos_xy=cos_xy,
        expect_cos_sum=cos_z + cos_xy,
        mse_per_axis=(k - active) / (2 * k),
        lam=lam,
    )
