"""Shared fixtures: canonical boxes, measurement settings, and theories."""
from __future__ import annotations

import numpy as np
import pytest

from gptw import quantum as q
from gptw.correlations import CorrelationBox


def pr_table() -> np.ndarray:
    t = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            for a in range(2):
                t[x, y, a, a ^ (x & y)] = 0.5
    return t


@pytest.fixture
def pr_box() -> CorrelationBox:
    return CorrelationBox((2, 2), (2, 2), pr_table())


@pytest.fixture
def deterministic_box() -> CorrelationBox:
    t = np.zeros((2, 2, 2, 2))
    t[:, :, 0, 0] = 1.0
    return CorrelationBox((2, 2), (2, 2), t)


def isotropic_table(visibility: float) -> np.ndarray:
    return visibility * pr_table() + (1 - visibility) * np.full((2, 2, 2, 2), 0.25)


@pytest.fixture
def isotropic_half() -> CorrelationBox:
    return CorrelationBox((2, 2), (2, 2), isotropic_table(0.5))


def singlet_optimal_settings() -> tuple[list[q.Povm], list[q.Povm]]:
    """Alice Z, X; Bob -(Z+X)/sqrt2, (X-Z)/sqrt2: CHSH = +2 sqrt 2 on the singlet."""
    alice = [q.z_basis(), q.x_basis()]
    bob = [
        q.povm_from_observable(-(q.PAULI_Z + q.PAULI_X) / np.sqrt(2)),
        q.povm_from_observable((q.PAULI_X - q.PAULI_Z) / np.sqrt(2)),
    ]
    return alice, bob


@pytest.fixture
def singlet_optimal_box() -> CorrelationBox:
    alice, bob = singlet_optimal_settings()
    return q.bipartite_box(q.singlet(), alice, bob)


def shared_bit_table() -> np.ndarray:
    """Uniform bit copied to three parties, every setting reads the bit."""
    t = np.zeros((2, 2, 2, 2, 2, 2))
    for bit in range(2):
        t[:, :, :, bit, bit, bit] = 0.5
    return t


@pytest.fixture
def shared_bit_box() -> CorrelationBox:
    return CorrelationBox((2, 2, 2), (2, 2, 2), shared_bit_table())


def cardinal_qubit_states() -> dict[str, q.DensityMatrix]:
    return {
        "zero": q.DensityMatrix.pure(q.KET0),
        "one": q.DensityMatrix.pure(q.KET1),
        "plus": q.DensityMatrix.pure(q.KET_PLUS),
        "minus": q.DensityMatrix.pure(q.KET_MINUS),
        "y+": q.DensityMatrix(np.array([[0.5, -0.5j], [0.5j, 0.5]])),
        "y-": q.DensityMatrix(np.array([[0.5, 0.5j], [-0.5j, 0.5]])),
        "mixed": q.DensityMatrix.maximally_mixed(2),
    }


def tomographic_povms() -> dict[str, q.Povm]:
    return {"X": q.x_basis(), "Y": q.y_basis(), "Z": q.z_basis()}


@pytest.fixture
def qubit_theory():
    return q.born_table(cardinal_qubit_states(), tomographic_povms())
