"""Cross-module property tests over seeded random instances."""
from __future__ import annotations

import numpy as np

from gptw import quantum as q
from gptw.correlations import chsh, is_bell_nonlocal
from gptw.duality import spatial_scenario, spatial_to_temporal
from gptw.ontic import find_local_model
from gptw.theory import operationally_equivalent


def test_chsh_bounded_by_four_and_tsirelson_on_quantum_boxes():
    rng = np.random.default_rng(100)
    for _ in range(40):
        state = q.ginibre_state(4, rng, dims=(2, 2))
        box = q.bipartite_box(
            state,
            [q.random_projective_qubit(rng) for _ in range(2)],
            [q.random_projective_qubit(rng) for _ in range(2)],
        )
        _, witness = is_bell_nonlocal(box)
        assert abs(witness.value) <= 4.0
        assert abs(witness.value) <= 2 * np.sqrt(2) + 1e-6


def test_chsh_abs_bound_on_arbitrary_boxes(pr_box, deterministic_box, isotropic_half):
    for box in (pr_box, deterministic_box, isotropic_half):
        for a0, a1 in ((0, 1), (1, 0)):
            for b0, b1 in ((0, 1), (1, 0)):
                assert abs(chsh(box, a0, a1, b0, b1).value) <= 4.0


def test_local_certificate_implies_chsh_bound():
    rng = np.random.default_rng(101)
    for _ in range(25):
        state = q.ginibre_state(4, rng, dims=(2, 2))
        noise = 0.55  # enough isotropic noise that most samples stay local
        uniform = np.full((2, 2, 2, 2), 0.25)
        quantum = q.bipartite_box(
            state,
            [q.random_projective_qubit(rng) for _ in range(2)],
            [q.random_projective_qubit(rng) for _ in range(2)],
        )
        from gptw.correlations import CorrelationBox

        box = CorrelationBox((2, 2), (2, 2), (1 - noise) * quantum.table + noise * uniform)
        if find_local_model(box, tol=1e-7) is not None:
            _, witness = is_bell_nonlocal(box)
            assert abs(witness.value) <= 2.0 + 1e-7


def test_equivalence_transitive_up_to_double_tolerance():
    # a ~tol b and b ~tol c force a ~2tol c on any theory (triangle inequality)
    from gptw.theory import Measurement, OperationalTheory

    eps = 1e-4
    table = {
        ("a", "I", "m"): [0.5, 0.5],
        ("b", "I", "m"): [0.5 + eps, 0.5 - eps],
        ("c", "I", "m"): [0.5 + 2 * eps, 0.5 - 2 * eps],
    }
    theory = OperationalTheory(["a", "b", "c"], ["I"], [Measurement("m", 2)], table)
    tol = 1.5 * eps
    assert operationally_equivalent(theory, "a", "b", tol)
    assert operationally_equivalent(theory, "b", "c", tol)
    assert operationally_equivalent(theory, "a", "c", 2 * tol)


def test_duality_preserves_tsirelson_cap():
    """Branch-index correlations of the dual never beat the spatial box's CHSH."""
    rng = np.random.default_rng(102)
    for _ in range(10):
        state = q.ginibre_state(4, rng, dims=(2, 2))
        alice = [q.random_projective_qubit(rng) for _ in range(2)]
        bob = [q.random_projective_qubit(rng) for _ in range(2)]
        box = q.bipartite_box(state, alice, bob)
        spatial_value = chsh(box).value

        expectations = {}
        for x in range(2):
            temporal = spatial_to_temporal(spatial_scenario(state, [alice[x], bob[0]]))
            from gptw.duality import temporal_scenario

            for y in range(2):
                dist = temporal_scenario(
                    temporal.ensemble, temporal.channel, [bob[y]]
                ).distribution.probabilities
                expectations[(x, y)] = sum(
                    (-1) ** (i + b) * dist[i, b] for i in range(2) for b in range(2)
                )
        pm = (
            expectations[(0, 0)]
            + expectations[(0, 1)]
            + expectations[(1, 0)]
            - expectations[(1, 1)]
        )
        assert abs(pm - spatial_value) < 1e-8
        assert abs(pm) <= 2 * np.sqrt(2) + 1e-6
