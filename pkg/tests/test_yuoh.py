# tests/test_yuoh.py
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from sicsim.core.yuoh import (
    CLASSICAL_BOUND_OPT3,
    CLASSICAL_BOUND_YO,
    INVALID_QRNG_CODES,
    N_EDGES,
    N_RAYS,
    OrthGraph,
    build_rays,
    get_ray,
    ideal_predictions,
    ray_table_document,
    reference_graph,
    witness_sets,
)
from sicsim.utils.errors import UnknownRayError
from sicsim.utils.labels import LabelResolver, ray_id, ray_label


def test_thirteen_rays_in_table_order():
    rays = build_rays()
    assert len(rays) == N_RAYS
    assert [r.label for r in rays][:3] == ["y1-", "y2-", "y3-"]
    assert rays[9].label == "h0"
    assert rays[12].direction == (0, 0, 1)


def test_qrng_codes_are_distinct_and_valid():
    codes = [r.qrng_code for r in build_rays()]
    assert len(set(codes)) == N_RAYS
    assert not set(codes) & set(INVALID_QRNG_CODES)
    assert set(codes) | set(INVALID_QRNG_CODES) == set(range(16))


def test_reference_graph_shape():
    graph = reference_graph()
    assert len(graph.edges) == N_EDGES
    degrees = {build_rays()[v].label: int(d) for v, d in enumerate(graph.degrees())}
    for label, d in degrees.items():
        assert d == (3 if label.startswith("h") else 4), label


def test_edges_are_exactly_the_orthogonal_pairs():
    rays = build_rays()
    graph = reference_graph()
    for u, v in combinations(rays, 2):
        assert graph.has_edge(u.id, v.id) == (float(np.dot(u.unit, v.unit)) == pytest.approx(0.0))


def test_witness_sets():
    sets = witness_sets()
    graph = reference_graph()
    assert len(sets.V_h) == 4
    assert len(sets.C2) == 9
    assert len(sets.C3) == 3
    assert len(sets.E_not_C2) == N_EDGES - 9
    assert all(graph.has_edge(u, v) for u, v in sets.C2)
    for t in sets.C3:
        assert all(graph.has_edge(a, b) for a, b in combinations(t, 2))


def test_ideal_predictions():
    ideal = ideal_predictions()
    assert ideal.chi_yo == Fraction(25, 3) > CLASSICAL_BOUND_YO
    assert ideal.chi_opt3 == Fraction(83, 3) > CLASSICAL_BOUND_OPT3


def test_graph_validation():
    with pytest.raises(ValueError):
        OrthGraph(np.array([[0, 1], [0, 0]], dtype=bool))
    with pytest.raises(ValueError):
        OrthGraph(np.eye(2, dtype=bool))


def test_relabeled_identity_is_equal():
    graph = reference_graph()
    assert graph.relabeled(range(N_RAYS)) == graph
    assert graph.relabeled(list(reversed(range(N_RAYS)))) != graph


@pytest.mark.parametrize(
    "spelling,expected",
    [("y1+", 3), ("Y1+", 3), ("y1p", 3), ("y1m", 0), ("y₁⁻", 0), (" h0 ", 9), ("z_3", 12)],
)
def test_label_spellings(spelling, expected):
    assert ray_id(spelling) == expected


def test_unknown_labels_raise():
    with pytest.raises(UnknownRayError):
        ray_id("q7")
    with pytest.raises(KeyError):
        ray_label(13)
    with pytest.raises(UnknownRayError):
        get_ray(-1)


def test_custom_label_resolver():
    resolver = LabelResolver(("a", "b"))
    assert resolver.ray_id("B") == 1
    assert resolver.labels_for([1, 0]) == ["b", "a"]


def test_ray_table_document():
    doc = ray_table_document()
    assert len(doc["rays"]) == N_RAYS
    assert len(doc["edges"]) == N_EDGES
    assert doc["invalid_qrng_codes"] == ["0000", "1110", "1111"]
    assert doc["classical_bounds"] == {"chi_yo": 8, "chi_opt3": 25}
