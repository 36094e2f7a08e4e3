# tests/test_reconstruct.py
import numpy as np
import pytest

from sicsim.analysis.reconstruct import (
    BLIND_LETTERS,
    CompatibilityEstimate,
    adjacency_from_data,
    blind_relabel,
    canonicalize,
    epsilon,
    epsilon_conditioned,
    epsilon_matrix,
    reconstruct,
    relabel_stream,
)
from sicsim.analysis.tables import CountTables, MINUS, PLUS, RecordStream, ideal_count_tables
from sicsim.core.qutrit import BRIGHT, DARK
from sicsim.core.yuoh import N_RAYS, OrthGraph, build_rays, reference_graph
from sicsim.utils.errors import CanonicalizationError, InsufficientDataError
from sicsim.utils.labels import ray_id


def _eps_for(graph: OrthGraph, off: float = 0.3) -> np.ndarray:
    eps = np.where(graph.adjacency, 0.0, off)
    np.fill_diagonal(eps, np.nan)
    return eps


def test_epsilon_by_hand():
    t = CountTables()
    u, w = ray_id("h0"), ray_id("h1")
    t.n2[u, w, MINUS, MINUS] = 1
    t.n2[u, w, MINUS, PLUS] = 5
    t.n2[w, u, MINUS, PLUS] = 3
    t.n2[w, u, PLUS, MINUS] = 100
    est = epsilon(t, "h0", "h1")
    assert est.samples == 9
    assert est.value == pytest.approx(1 / 9)
    assert epsilon(t, "h1", "h0") == est


def test_epsilon_same_ray_is_rejected():
    with pytest.raises(ValueError):
        epsilon(CountTables(), "z1", "z1")


def test_epsilon_without_bright_first_raises():
    with pytest.raises(InsufficientDataError):
        epsilon(CountTables(), "z1", "z2")


def test_epsilon_conditioned():
    rays = [ray_id(r) for r in ["z1", "h0", "h1", "z2", "h0", "h1"]]
    stream = RecordStream.from_arrays(rays, [BRIGHT, BRIGHT, BRIGHT, BRIGHT, BRIGHT, DARK])
    est = epsilon_conditioned(stream, "h0", "h1", "z1")
    assert est.samples == 1
    assert est.value == 1.0


def test_adjacency_from_reference_epsilons():
    graph = adjacency_from_data(_eps_for(reference_graph()))
    assert graph == reference_graph()


def test_adjacency_threshold_is_strict():
    eps = _eps_for(reference_graph(), off=0.05)
    assert len(adjacency_from_data(eps, threshold=0.05).edges) == 24
    assert len(adjacency_from_data(eps, threshold=0.06).edges) == N_RAYS * (N_RAYS - 1) // 2


def test_adjacency_with_empty_pairs_raises():
    with pytest.raises(InsufficientDataError):
        adjacency_from_data(epsilon_matrix(ideal_count_tables()))


def test_canonicalize_reference_graph():
    labeling = canonicalize(reference_graph())
    assert labeling.verified
    assert sorted(labeling.permutation) == list(range(N_RAYS))


@pytest.mark.parametrize("seed", range(100))
def test_canonicalize_relabeled_graph(seed):
    shuffle = np.random.default_rng(seed).permutation(N_RAYS)
    graph = reference_graph().relabeled(shuffle)
    labeling = canonicalize(graph)
    assert labeling.verified
    assert graph.relabeled(labeling.permutation) == reference_graph()


def test_canonicalize_rejects_wrong_degrees():
    edges = list(reference_graph().edges)[1:]
    with pytest.raises(CanonicalizationError) as err:
        canonicalize(OrthGraph.from_edges(N_RAYS, edges))
    assert err.value.step == 1


def test_canonicalize_rejects_wrong_size():
    with pytest.raises(CanonicalizationError) as err:
        canonicalize(OrthGraph.from_edges(4, [(0, 1)]))
    assert err.value.step == 1


@pytest.mark.parametrize("seed", range(5))
def test_canonical_h0_sees_every_minus_ray(seed):
    shuffle = np.random.default_rng(seed).permutation(N_RAYS)
    graph = reference_graph().relabeled(shuffle)
    named = canonicalize(graph).labeled()
    for k in (1, 2, 3):
        assert graph.adjacency[named["h0"], named[f"y{k}-"]]
        assert not graph.adjacency[named["h0"], named[f"y{k}+"]]


def test_labeled_uses_observed_names():
    labeling = canonicalize(reference_graph())
    named = labeling.labeled(BLIND_LETTERS)
    assert set(named) == {r.label for r in build_rays()}
    assert set(named.values()) == set(BLIND_LETTERS)


def test_relabel_stream_maps_rays():
    stream = RecordStream.from_arrays([0, 1, 2], [BRIGHT, DARK, DARK])
    mapping = np.arange(N_RAYS)[::-1]
    out = relabel_stream(stream, mapping)
    assert list(out.segments[0].rays) == [12, 11, 10]
    assert np.array_equal(out.segments[0].slots, stream.segments[0].slots)


def test_compatibility_rows():
    est = CompatibilityEstimate(
        eps=_eps_for(reference_graph()),
        std_error=np.zeros((N_RAYS, N_RAYS)),
        samples=np.ones((N_RAYS, N_RAYS), dtype=np.int64),
    )
    rows = est.rows()
    assert len(rows) == N_RAYS * (N_RAYS - 1) // 2
    assert sum(r["compatible"] for r in rows) == 24


def test_reconstruct_ideal_campaign(ideal_stream):
    result = reconstruct(ideal_stream)
    assert result.failure is None
    assert result.graph == reference_graph()
    assert result.labeling.verified
    assert np.nanmax(result.estimate.eps[reference_graph().adjacency]) == 0.0


def test_blind_relabeling_recovers_an_automorphism(ideal_stream):
    result = blind_relabel(ideal_stream, np.random.default_rng(4))
    assert result.failure is None
    assert result.n_edges == 24
    assert result.labeling.verified
    assignment = result.assignment()
    assert len(assignment) == N_RAYS
    # reference ray -> ray the matched letter actually hid is a symmetry of the graph
    hidden = [ray_id(assignment[r.label][1]) for r in build_rays()]
    assert reference_graph().relabeled(hidden) == reference_graph()
