"""Shared fixtures and independent oracles for the test suite."""

import numpy as np
import pytest


def jy_generator(j: int) -> np.ndarray:
    """Spin-j angular momentum generator J_y in the ascending |j, m> basis."""
    dim = 2 * j + 1
    ms = np.arange(-j, j + 1)
    raising = np.zeros((dim, dim))
    for i, m in enumerate(ms[:-1]):
        raising[i + 1, i] = np.sqrt(j * (j + 1) - m * (m + 1))
    return (raising - raising.T) / (2.0 * 1j)


def generator_small_d_matrix(j: int, beta: float) -> np.ndarray:
    """Independent small-d matrix via diagonalization of J_y (tests only)."""
    evals, evecs = np.linalg.eigh(jy_generator(j))
    mat = evecs @ np.diag(np.exp(-1j * beta * evals)) @ evecs.conj().T
    assert np.max(np.abs(mat.imag)) < 1e-12
    return mat.real


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
