import math

import numpy as np
import pytest

from ffzne.circuit import (
    Circuit,
    CircuitError,
    Gate,
    cliffordize,
    fold,
    gen_efficient_su2,
    gen_hamiltonian_sim,
    gen_mirrored_brickwork,
    interaction_graph,
    load_circuit,
    load_circuit_meta,
    pauli_twirl,
    random_clifford_circuit,
    save_circuit,
)
from ffzne.device import DeviceModel
from ffzne.sim.expval import NoiseModel, PauliObservable, exact_expval, make_observable

from oracles import statevector_probs

NOISELESS = NoiseModel.noiseless()


def _z_all(n):
    return [make_observable(n, w) for w in range(1, min(n, 3) + 1)]


def _path(n):
    return tuple((q, q + 1) for q in range(n - 1))


def test_su2_six_qubits_is_a_path():
    c = gen_efficient_su2(6, 1)
    assert c.count("CX") == 5
    assert interaction_graph(c).edges == _path(6)


@pytest.mark.parametrize("n,reps,depth", [(50, 1, 49), (50, 2, 98), (6, 3, 15)])
def test_su2_two_qubit_depth(n, reps, depth):
    assert gen_efficient_su2(n, reps).two_qubit_depth() == depth


def test_hamsim_counts():
    c = gen_hamiltonian_sim(6, 1)
    assert interaction_graph(c).edges == _path(6)
    assert c.count("CX") == 10
    assert len(gen_hamiltonian_sim(20, 3)) == 3 * len(gen_hamiltonian_sim(20, 1))
    assert gen_hamiltonian_sim(2, 1).count("CX") == 2
    assert interaction_graph(gen_hamiltonian_sim(6, 2)).edges == _path(6)


def test_generator_argument_checks():
    with pytest.raises(CircuitError):
        gen_efficient_su2(1, 1)
    with pytest.raises(CircuitError):
        gen_hamiltonian_sim(4, 0)
    with pytest.raises(CircuitError):
        gen_mirrored_brickwork(4, 3)


@pytest.mark.parametrize("n,depth", [(8, 4), (6, 10), (4, 0)])
def test_brickwork_ideal_is_one(n, depth):
    c = gen_mirrored_brickwork(n, depth, seed=5)
    if depth == 0:
        assert len(c) == 0
    for q in range(n):
        obs = PauliObservable(((1.0, "".join("Z" if k == q else "I" for k in range(n))),))
        assert exact_expval(c, None, None, NOISELESS, obs).mean == 1.0


def test_brickwork_ideal_large():
    c = gen_mirrored_brickwork(40, 40, seed=1)
    assert exact_expval(c, None, None, NOISELESS, make_observable(40, 1)).mean == pytest.approx(1.0, abs=1e-12)


def test_gate_validation():
    with pytest.raises(CircuitError):
        Gate("CX", (1, 1))
    with pytest.raises(CircuitError):
        Gate("RZ", (0,))
    with pytest.raises(CircuitError):
        Gate("H", (0,), 0.3)
    with pytest.raises(CircuitError):
        Gate("T", (0,))
    with pytest.raises(CircuitError):
        Circuit(2, (Gate("H", (3,)),))


def test_cliffordize_snaps_angles():
    assert cliffordize(Circuit(1, (Gate("RZ", (0,), 0.1),))).gates == ()
    assert cliffordize(Circuit(1, (Gate("RZ", (0,), math.pi / 2 + 0.01),))).gates == (Gate("S", (0,)),)


@pytest.mark.parametrize("kind", ["RX", "RY", "RZ"])
@pytest.mark.parametrize("k", [0, 1, 2, 3, -1, 5])
def test_cliffordize_matches_rotation_statevector(kind, k):
    prep = (Gate("H", (0,)), Gate("S", (0,)), Gate("H", (1,)), Gate("CX", (0, 1)))
    rot = Circuit(2, prep + (Gate(kind, (0,), k * math.pi / 2),))
    assert np.allclose(statevector_probs(rot), statevector_probs(cliffordize(rot)), atol=1e-12)


def test_cliffordize_idempotent_and_preserves_cx():
    c = gen_efficient_su2(6, 2, seed=3)
    once = cliffordize(c)
    assert cliffordize(once) == once
    assert once.num_qubits == c.num_qubits
    assert [g for g in once.gates if g.kind == "CX"] == [g for g in c.gates if g.kind == "CX"]


def test_fold_gate_counts():
    c = random_clifford_circuit(3, 10, seed=2)
    assert fold(c, 1) == c
    assert len(fold(c, 3)) == 30
    assert abs(len(fold(c, 1.2)) - 12) <= 1
    with pytest.raises(CircuitError):
        fold(c, 0.5)


@pytest.mark.parametrize("scale", [1, 1.2, 2, 3, 5])
def test_fold_preserves_noiseless_expvals(scale):
    for seed in range(5):
        c = random_clifford_circuit(4, 25, seed=seed)
        folded = fold(c, scale)
        assert np.allclose(statevector_probs(c), statevector_probs(folded), atol=1e-12)
        for obs in _z_all(4):
            a = exact_expval(c, None, None, NOISELESS, obs).mean
            b = exact_expval(folded, None, None, NOISELESS, obs).mean
            assert abs(a - b) < 1e-12


def test_fold_handles_rotations():
    c = Circuit(1, (Gate("RX", (0,), 0.3), Gate("RZ", (0,), 1.1)))
    f = fold(c, 3)
    assert np.allclose(statevector_probs(c), statevector_probs(f), atol=1e-12)


def _two_qubit_noise_device(n):
    edges = {(a, b) for a in range(n) for b in range(a + 1, n)}
    errs = {e: 0.01 * (1 + (e[0] + 2 * e[1]) % 5) for e in edges}
    return DeviceModel(n, frozenset(edges), errs, {q: 0.0 for q in range(n)})


def test_twirl_preserves_graph_and_expval():
    dev = _two_qubit_noise_device(4)
    for seed in range(8):
        c = random_clifford_circuit(4, 30, seed=seed)
        t = pauli_twirl(c, seed=seed)
        assert interaction_graph(t) == interaction_graph(c)
        assert pauli_twirl(c, seed=seed) == t
        for obs in _z_all(4):
            assert abs(exact_expval(c, None, None, NOISELESS, obs).mean - exact_expval(t, None, None, NOISELESS, obs).mean) < 1e-12
            # depolarizing noise commutes with Paulis, so twirling leaves the noisy value unchanged
            noisy = exact_expval(c, list(range(4)), dev, NoiseModel.per_gate(), obs).mean
            twirled = exact_expval(t, list(range(4)), dev, NoiseModel.per_gate(), obs).mean
            assert abs(noisy - twirled) < 1e-12


def test_twirl_rejects_non_clifford():
    with pytest.raises(CircuitError):
        pauli_twirl(Circuit(1, (Gate("RZ", (0,), 0.3),)))


def test_interaction_graph_without_cx():
    assert interaction_graph(Circuit(3, (Gate("H", (0,)),))).edges == ()


def test_save_load_round_trip(tmp_path):
    c = gen_efficient_su2(4, 2, seed=1)
    path = tmp_path / "c.json"
    save_circuit(c, path, meta={"family": "su2"})
    assert load_circuit(path) == c
    assert load_circuit_meta(path) == {"family": "su2"}
    path.write_text("{not json")
    with pytest.raises(CircuitError):
        load_circuit(path)


def test_inverse_composes_to_identity():
    c = random_clifford_circuit(3, 20, seed=9)
    both = Circuit(3, c.gates + c.inverse().gates)
    probs = statevector_probs(both)
    assert abs(probs[0] - 1) < 1e-12
