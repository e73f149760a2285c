import math

import numpy as np
import pytest

from ffzne.circuit import Circuit, Gate, gen_mirrored_brickwork, random_clifford_circuit
from ffzne.device import DeviceModel
from ffzne.sim.expval import (
    NoiseModel,
    PauliObservable,
    exact_expval,
    exact_zero_probability,
    global_depolarizing_expval,
    make_observable,
    noise_sites,
    sample_bitstrings,
    sampled_expval,
)

from oracles import density_matrix, dm_expval, statevector_probs

PER_GATE = NoiseModel.per_gate()


def complete_device(n, seed, scale=0.05):
    rng = np.random.default_rng(seed)
    edges = [(a, b) for a in range(n) for b in range(a + 1, n)]
    e2 = {e: float(v) for e, v in zip(edges, rng.uniform(0, scale, len(edges)))}
    e1 = {q: float(v) for q, v in enumerate(rng.uniform(0, scale / 5, n))}
    return DeviceModel(n, frozenset(edges), e2, e1)


def random_observable(n, rng, terms=3):
    return PauliObservable(
        tuple((float(rng.normal()), "".join(rng.choice(list("IXYZ"), n))) for _ in range(terms))
    )


def test_observable_weights():
    assert make_observable(3, 1).terms == ((1 / 3, "ZII"), (1 / 3, "IZI"), (1 / 3, "IIZ"))
    assert make_observable(3, 2).terms == ((0.5, "ZZI"), (0.5, "IZZ"))
    assert make_observable(3, 3).terms == ((1.0, "ZZZ"),)
    with pytest.raises(ValueError):
        make_observable(3, 4)


def test_empty_circuit_noiseless():
    c = Circuit(1)
    assert exact_expval(c, None, None, NoiseModel.noiseless(), PauliObservable(((1.0, "Z"),))).mean == 1.0


def test_single_x_gate_with_noise():
    p = 0.07
    dev = DeviceModel(1, frozenset(), {}, {0: p})
    c = Circuit(1, (Gate("X", (0,)),))
    obs = PauliObservable(((1.0, "Z"),))
    got = exact_expval(c, [0], dev, PER_GATE, obs).mean
    assert got == pytest.approx(-(1 - p), abs=1e-15)
    assert got == pytest.approx(dm_expval(c, obs.terms, [0], dev), abs=1e-14)


@pytest.mark.parametrize("seed", range(10))
def test_exact_matches_density_matrix(seed):
    rng = np.random.default_rng(seed)
    dev = complete_device(4, seed)
    c = random_clifford_circuit(4, 30, seed=seed)
    layout = [int(v) for v in rng.permutation(4)]
    obs = random_observable(4, rng)
    got = exact_expval(c, layout, dev, PER_GATE, obs).mean
    assert abs(got - dm_expval(c, obs.terms, layout, dev)) < 1e-12


def test_clifford_rotations_match_density_matrix():
    dev = complete_device(2, 1)
    gates = (Gate("RX", (0,), math.pi / 2), Gate("CX", (0, 1)), Gate("RY", (1,), -math.pi / 2), Gate("RZ", (0,), math.pi))
    c = Circuit(2, gates)
    for s in ("ZI", "IZ", "XX", "YZ", "ZY"):
        obs = PauliObservable(((1.0, s),))
        assert abs(exact_expval(c, [0, 1], dev, PER_GATE, obs).mean - dm_expval(c, obs.terms, [0, 1], dev)) < 1e-12


def test_zero_probability_matches_density_matrix():
    for seed in range(5):
        dev = complete_device(4, seed, scale=0.2)
        c = random_clifford_circuit(4, 25, seed=seed)
        rho = density_matrix(c, list(range(4)), dev)
        assert abs(exact_zero_probability(c, list(range(4)), dev, PER_GATE) - rho[0, 0].real) < 1e-12


def test_linearity_in_observable():
    rng = np.random.default_rng(3)
    dev = complete_device(5, 3)
    c = random_clifford_circuit(5, 40, seed=3)
    o1, o2 = random_observable(5, rng), random_observable(5, rng)
    lay = list(range(5))
    e = lambda o: exact_expval(c, lay, dev, PER_GATE, o).mean
    assert abs(e(o1.scaled(0.7) + o2.scaled(-1.3)) - (0.7 * e(o1) - 1.3 * e(o2))) < 1e-12


def test_global_depolarizing():
    assert global_depolarizing_expval(1.0, 0.0, 0.1) == pytest.approx(0.9)
    assert global_depolarizing_expval(0.3, 0.0, 0.0) == 0.3
    assert global_depolarizing_expval(0.3, 0.2, 1.0) == 0.2
    c = gen_mirrored_brickwork(4, 4, seed=2)
    obs = make_observable(4, 2)
    values = [abs(exact_expval(c, None, None, NoiseModel.global_depolarizing(p), obs).mean) for p in np.linspace(0, 1, 11)]
    assert all(a >= b for a, b in zip(values, values[1:]))
    rho_value = dm_expval(c, obs.terms, global_p=0.3)
    assert exact_expval(c, None, None, NoiseModel.global_depolarizing(0.3), obs).mean == pytest.approx(rho_value, abs=1e-12)


def test_noise_sites_reject_non_edges():
    dev = DeviceModel(3, frozenset({(0, 1), (1, 2)}), {(0, 1): 0.1, (1, 2): 0.1}, {0: 0, 1: 0, 2: 0})
    c = Circuit(3, (Gate("CX", (0, 2)),))
    with pytest.raises(ValueError):
        noise_sites(c, [0, 1, 2], dev, PER_GATE)


def test_sampled_noiseless_brickwork_is_deterministic():
    c = gen_mirrored_brickwork(8, 4, seed=0)
    est = sampled_expval(c, None, None, NoiseModel.noiseless(), make_observable(8, 1), 2000, seed=1)
    assert est.mean == 1.0 and est.stderr == 0.0


@pytest.mark.parametrize("seed", range(20))
def test_tableau_distribution_matches_statevector(seed):
    n = 3 + seed % 8
    c = random_clifford_circuit(n, 8 * n, seed=seed)
    sites = noise_sites(c, None, None, NoiseModel.noiseless())
    bits = sample_bitstrings(c, sites, 10_000, seed)
    idx = bits.astype(np.int64) @ (1 << np.arange(n - 1, -1, -1))
    empirical = np.bincount(idx, minlength=2**n) / len(idx)
    tv = 0.5 * np.abs(empirical - statevector_probs(c)).sum()
    assert tv < 0.05


def test_sampled_stderr_definition():
    dev = complete_device(4, 0, scale=0.2)
    c = random_clifford_circuit(4, 30, seed=0)
    est = sampled_expval(c, list(range(4)), dev, PER_GATE, make_observable(4, 1), 10_000, seed=4)
    assert est.shots == 10_000
    # 4 equally weighted +-1 terms: per-shot value std is bounded by 1
    assert 0 < est.stderr <= 1 / 100 + 1e-12


def test_sampling_is_reproducible():
    dev = complete_device(4, 0, scale=0.2)
    c = random_clifford_circuit(4, 30, seed=1)
    sites = noise_sites(c, list(range(4)), dev, PER_GATE)
    a = sample_bitstrings(c, sites, 20_000, 11)
    b = sample_bitstrings(c, sites, 20_000, 11)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_bitstrings(c, sites, 20_000, 12))


def test_sampled_rejects_non_diagonal():
    c = Circuit(2, (Gate("H", (0,)),))
    with pytest.raises(ValueError):
        sampled_expval(c, None, None, NoiseModel.noiseless(), PauliObservable(((1.0, "XI"),)), 10, 0)


@pytest.mark.slow
def test_sampled_unbiased_at_million_shots():
    dev = complete_device(4, 6, scale=0.2)
    c = random_clifford_circuit(4, 40, seed=6)
    lay = list(range(4))
    for w in (1, 2, 3):
        obs = make_observable(4, w)
        exact = exact_expval(c, lay, dev, PER_GATE, obs).mean
        est = sampled_expval(c, lay, dev, PER_GATE, obs, 1_000_000, seed=w)
        assert abs(est.mean - exact) <= 5 * est.stderr


def test_sampled_global_depolarizing():
    c = gen_mirrored_brickwork(4, 4, seed=2)
    obs = make_observable(4, 1)
    noise = NoiseModel.global_depolarizing(0.3)
    est = sampled_expval(c, None, None, noise, obs, 50_000, seed=0)
    assert abs(est.mean - exact_expval(c, None, None, noise, obs).mean) <= 4 * est.stderr
