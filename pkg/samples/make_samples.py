"""Regenerate the sample input files in this directory.

Usage: python3 samples/make_samples.py
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from gptw import quantum as q
from gptw import serialize as ser
from gptw.correlations import CorrelationBox
from gptw.ontic import OnticModel

HERE = Path(__file__).parent


def pr_box() -> CorrelationBox:
    t = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            for a in range(2):
                t[x, y, a, a ^ (x & y)] = 0.5
    return CorrelationBox((2, 2), (2, 2), t)


def singlet_optimal_box() -> CorrelationBox:
    alice = [q.z_basis(), q.x_basis()]
    bob = [
        q.povm_from_observable(-(q.PAULI_Z + q.PAULI_X) / np.sqrt(2)),
        q.povm_from_observable((q.PAULI_X - q.PAULI_Z) / np.sqrt(2)),
    ]
    return q.bipartite_box(q.singlet(), alice, bob)


def shared_bit_box() -> CorrelationBox:
    t = np.zeros((2, 2, 2, 2, 2, 2))
    for bit in range(2):
        t[:, :, :, bit, bit, bit] = 0.5
    return CorrelationBox((2, 2, 2), (2, 2, 2), t)


def qubit_theory():
    sat_obs = (q.PAULI_X + q.PAULI_Z) / np.sqrt(2)
    _, vecs = np.linalg.eigh(sat_obs)
    states = {
        "zero": q.DensityMatrix.pure(q.KET0),
        "one": q.DensityMatrix.pure(q.KET1),
        "plus": q.DensityMatrix.pure(q.KET_PLUS),
        "minus": q.DensityMatrix.pure(q.KET_MINUS),
        "y+": q.DensityMatrix(np.array([[0.5, -0.5j], [0.5j, 0.5]])),
        "y-": q.DensityMatrix(np.array([[0.5, 0.5j], [-0.5j, 0.5]])),
        "sat": q.DensityMatrix.pure(vecs[:, -1]),
    }
    return q.born_table(states, {"X": q.x_basis(), "Y": q.y_basis(), "Z": q.z_basis()})


def classical_bit_model() -> OnticModel:
    return OnticModel(
        ["l0", "l1"],
        mu={"p0": [1.0, 0.0], "p1": [0.0, 1.0], "pu": [0.5, 0.5]},
        xi={"read": np.array([[1.0, 0.0], [0.0, 1.0]])},
        trans={"I": np.eye(2), "flip": np.array([[0.0, 1.0], [1.0, 0.0]])},
    )


def main() -> None:
    ser.save_box(pr_box(), HERE / "pr_box.json")
    ser.save_box(singlet_optimal_box(), HERE / "singlet_opt_box.json")
    ser.save_box(shared_bit_box(), HERE / "shared_bit_box.json")
    ser.save_theory(qubit_theory(), HERE / "qubit_theory.json")
    ser.save_model(classical_bit_model(), HERE / "classical_bit_model.json")

    ser.save_state(q.singlet(), HERE / "singlet.json")
    rng = np.random.default_rng(7)
    ser.save_state(q.ginibre_state(4, rng, dims=(2, 2)), HERE / "random_two_qubit.json")
    ser.save_povm(q.z_basis(), HERE / "z_basis.json")
    ser.save_povm(q.x_basis(), HERE / "x_basis.json")
    ser.save_povm(
        q.povm_from_observable(-(q.PAULI_Z + q.PAULI_X) / np.sqrt(2)), HERE / "b0.json"
    )
    ser.save_povm(
        q.povm_from_observable((q.PAULI_X - q.PAULI_Z) / np.sqrt(2)), HERE / "b1.json"
    )
    ser.save_state(q.DensityMatrix.pure(q.KET0), HERE / "state_zero.json")
    ser.save_state(q.DensityMatrix.pure(q.KET_PLUS), HERE / "state_plus.json")
    ser.save_state(q.DensityMatrix(np.diag([0.3, 0.7])), HERE / "state_diag.json")
    print(f"wrote samples into {HERE}")


if __name__ == "__main__":
    main()
