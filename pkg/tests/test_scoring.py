import itertools

import numpy as np
import pytest

from ffzne.circuit import Circuit, Gate, gen_efficient_su2, gen_hamiltonian_sim, cliffordize, interaction_graph
from ffzne.device import DeviceGenSpec, DeviceModel, generate_device
from ffzne.layout import enumerate_layouts
from ffzne.scoring import (
    InsufficientLayoutsError,
    ScoredLayout,
    ScoreTable,
    build_qic,
    build_table,
    exact_qic_scores,
    filter_scores,
    load_scores,
    save_scores,
    score_fidelity_product,
    score_layouts,
    score_qic,
)

from oracles import density_matrix, filter_oracle, statevector_probs


@pytest.fixture(scope="module")
def device():
    return generate_device(DeviceGenSpec("heavy-hex", (2, 2), eps2=0.03, eps1=0.003, seed=5))


def two_qubit_device(p2, p1=0.0):
    return DeviceModel(2, frozenset({(0, 1)}), {(0, 1): p2}, {0: p1, 1: p1})


def test_fidelity_product_single_cx():
    c = Circuit(2, (Gate("CX", (0, 1)),))
    assert score_fidelity_product(c, (0, 1), two_qubit_device(0.01)) == pytest.approx(0.01, abs=1e-15)


def test_fidelity_product_many_cx():
    c = Circuit(2, tuple(Gate("CX", (0, 1)) for _ in range(200)))
    got = score_fidelity_product(c, (0, 1), two_qubit_device(0.01))
    assert got == pytest.approx(1 - 0.99**200, rel=1e-12)
    assert round(got, 4) == 0.8660


def test_fidelity_product_monotone_and_local(device):
    c = cliffordize(gen_efficient_su2(5, 2, seed=1))
    layout = enumerate_layouts(interaction_graph(c), device)[3]
    base = score_fidelity_product(c, layout, device)
    used_edges = {tuple(sorted((layout[a], layout[b]))) for a, b in interaction_graph(c).edges}
    for e in sorted(device.edges):
        bumped = device.with_errors(two_qubit_error={e: device.two_qubit_error[e] + 0.05})
        s = score_fidelity_product(c, layout, bumped)
        if e in used_edges:
            assert s > base
        else:
            assert s == base
    for q in range(device.num_qubits):
        bumped = device.with_errors(one_qubit_error={q: device.one_qubit_error[q] + 0.05})
        s = score_fidelity_product(c, layout, bumped)
        assert s >= base
        if q not in layout:
            assert s == base


def test_qic_construction():
    path3 = Circuit(3, (Gate("CX", (0, 1)), Gate("CX", (1, 2))))
    qic = build_qic(path3)
    assert qic.count("CX") == 4
    assert statevector_probs(qic)[0] == pytest.approx(1.0, abs=1e-12)
    assert build_qic(gen_efficient_su2(5, 1)) == build_qic(gen_efficient_su2(5, 3))


def test_qic_noiseless_score_is_zero(device):
    c = gen_efficient_su2(5, 1)
    quiet = device.with_errors({e: 0.0 for e in device.edges}, {q: 0.0 for q in range(device.num_qubits)})
    layout = enumerate_layouts(interaction_graph(c), quiet)[0]
    assert score_qic(c, layout, quiet) == 0.0


def test_qic_single_edge_matches_density_matrix():
    p = 0.08
    c = Circuit(2, (Gate("CX", (0, 1)),))
    dev = two_qubit_device(p)
    rho = density_matrix(build_qic(c), (0, 1), dev)
    assert score_qic(c, (0, 1), dev) == pytest.approx(1 - rho[0, 0].real, abs=1e-12)
    sampled = score_qic(c, (0, 1), dev, shots=100_000, seed=3)
    assert abs(sampled - (1 - rho[0, 0].real)) < 4 * np.sqrt(0.1 * 0.9 / 100_000)


def test_batched_qic_matches_per_layout(device):
    c = cliffordize(gen_efficient_su2(6, 1, seed=2))
    layouts = list(enumerate_layouts(interaction_graph(c), device))[:40]
    batched = exact_qic_scores(c, layouts, device)
    single = [score_qic(c, l, device) for l in layouts]
    assert np.allclose(batched, single, atol=1e-14)


def test_qic_sampled_seed_is_per_layout(device):
    c = gen_efficient_su2(5, 1)
    layouts = list(enumerate_layouts(interaction_graph(c), device))[:6]
    forward = score_layouts(c, layouts, device, "qic", shots=500, seed=9)
    backward = score_layouts(c, layouts[::-1], device, "qic", shots=500, seed=9)
    assert {e.layout: e.score for e in forward.entries} == {e.layout: e.score for e in backward.entries}


def test_qic_order_agrees_with_fidelity_product(device):
    c = cliffordize(gen_hamiltonian_sim(4, 1))
    layouts = list(enumerate_layouts(interaction_graph(c), device))
    rng = np.random.default_rng(0)
    picks = [layouts[i] for i in rng.choice(len(layouts), 12, replace=False)]
    fp = {l: score_fidelity_product(c, l, device) for l in picks}
    qic = {l: score_qic(c, l, device, shots=100_000, seed=1) for l in picks}
    pairs = list(itertools.combinations(picks, 2))
    agree = sum((fp[a] < fp[b]) == (qic[a] < qic[b]) for a, b in pairs)
    assert agree >= 0.9 * len(pairs)


def test_score_table_sorted_with_stats(device):
    c = gen_efficient_su2(5, 1)
    layouts = enumerate_layouts(interaction_graph(c), device)
    table = score_layouts(c, layouts, device, "fp")
    assert table.method == "fidelity-product"
    assert np.all(np.diff(table.scores) >= 0)
    assert table.mean == pytest.approx(np.mean(table.scores))
    assert table.stddev == pytest.approx(np.std(table.scores))
    with pytest.raises(ValueError):
        score_layouts(c, layouts, device, "magic")


def test_scores_round_trip(tmp_path, device):
    c = gen_efficient_su2(4, 1)
    table = score_layouts(c, enumerate_layouts(interaction_graph(c), device), device, "qic")
    save_scores(table, tmp_path / "s.json")
    back = load_scores(tmp_path / "s.json")
    assert back.entries == table.entries
    assert back.mean == table.mean


def _table(scores):
    return build_table([ScoredLayout((k,), s) for k, s in enumerate(scores)])


def test_filter_examples():
    with pytest.raises(InsufficientLayoutsError, match="insufficient layouts for extrapolation"):
        filter_scores(_table([0.1, 0.2, 0.999]))
    kept = filter_scores(_table([0.1, 0.11, 0.12, 0.9]))
    assert list(kept.scores) == [0.1, 0.11, 0.12, 0.9]
    assert len(filter_scores(_table([0.3] * 5))) == 5


def test_filter_drops_outlier_after_exclusion():
    scores = [0.1] * 20 + [0.8, 0.999]
    kept = filter_scores(_table(scores))
    assert list(kept.scores) == filter_oracle(scores)
    assert 0.8 not in kept.scores


def test_filter_random_against_oracle():
    rng = np.random.default_rng(1)
    for _ in range(300):
        scores = list(rng.beta(2, 5, size=int(rng.integers(1, 30))))
        scores += [0.999] * int(rng.integers(0, 3)) + list(rng.uniform(0.6, 1.0, int(rng.integers(0, 2))))
        want = filter_oracle(scores)
        if want is None:
            with pytest.raises(InsufficientLayoutsError):
                filter_scores(_table(scores))
        else:
            assert list(filter_scores(_table(scores)).scores) == want
