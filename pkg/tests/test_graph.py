import json

import pytest

from hcmeta.graph import (BipartiteGraph, GraphValidationError,
                          _general_family, build_family, double_graph,
                          graphs_isomorphic, neighborhood, parse_graph_spec,
                          validate)


def test_complete_bipartite_shape():
    g = build_family("complete:2x3")
    rep = validate(g)
    assert (rep.n_u, rep.n_v, rep.n_edges) == (2, 3, 6)
    degrees = sorted(len(g.adjacency[a]) for a in range(5))
    assert degrees == [2, 2, 2, 3, 3]       # not regular
    assert rep.regular_degree is None
    assert rep.girth_lower_bound == 4


def test_even_torus_shape():
    g = build_family("torus:4x4")
    rep = validate(g)
    assert (rep.n_u, rep.n_v, rep.n_edges) == (8, 8, 32)
    assert rep.regular_degree == 4
    # U is the even-coordinate-sum part
    site_of = g.meta["site_of_point"]
    for (i, j), s in site_of.items():
        assert ((i + j) % 2 == 0) == (s in set(g.u_sites))


def test_hypercube_shape():
    g = build_family("hypercube:3")
    rep = validate(g)
    assert (rep.n_u, rep.n_v, rep.n_edges) == (4, 4, 12)
    assert rep.regular_degree == 3
    site_of = g.meta["site_of_word"]
    for w, s in site_of.items():
        assert (bin(w).count("1") % 2 == 0) == (s in set(g.u_sites))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_doubled_cycle_is_cyclic_ladder(n):
    dc = double_graph(_general_family("cycle", [2 * n]))
    ladder = build_family(f"ladder:{2 * n}")
    assert graphs_isomorphic(dc, ladder)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_doubled_hypercube_is_next_hypercube(d):
    dh = double_graph(_general_family("hypercube", [d]))
    hd1 = build_family(f"hypercube:{d + 1}")
    assert graphs_isomorphic(dh, hd1)


def test_doubled_single_vertex_is_edge():
    g = double_graph(_general_family("vertex", []))
    assert g.n_sites == 2 and g.edges == [(0, 1)]


def test_neighborhood_torus_singleton():
    g = build_family("torus:6x6")
    a = g.v_sites[0]
    assert len(neighborhood(g, {a})) == 4
    assert neighborhood(g, set()) == set()


def test_neighborhood_doubled_torus_singleton_is_closed_ball():
    g = build_family("doubled(torus:5x5)")
    b = g.v_sites[0]
    nb = neighborhood(g, {b})
    assert len(nb) == 5                     # red copy of p plus its 4 grid nbrs
    assert nb <= set(g.u_sites)


def test_neighborhood_monotone():
    g = build_family("torus:6x6")
    import random
    rnd = random.Random(7)
    for _ in range(50):
        a = set(rnd.sample(g.v_sites, 3))
        b = a | set(rnd.sample(g.v_sites, 2))
        assert neighborhood(g, a) <= neighborhood(g, b)


def test_neighborhood_rejects_u_site():
    g = build_family("cycle:6")
    with pytest.raises(GraphValidationError):
        neighborhood(g, {g.u_sites[0]})


def test_validate_reports():
    rep = validate(build_family("cycle:6"))
    assert rep.connected and rep.regular_degree == 2 and rep.girth_lower_bound == 6
    assert rep.girth_exact
    rep = validate(build_family("torus:6x6"))
    assert rep.regular_degree == 4 and rep.girth_lower_bound == 4
    # every doubled graph with an edge contains red-blue 4-cycles
    rep = validate(build_family("doubled(cycle:5)"))
    assert rep.girth_lower_bound == 4
    # the girth scan cap bounds the reported value when no cycle is found
    rep = validate(build_family("path:6"), girth_cap=10)
    assert rep.girth_lower_bound == 10 and not rep.girth_exact


@pytest.mark.parametrize("spec", ["torus:5x6", "torus:6x5", "cycle:7",
                                  "complete:0x3", "hypercube:0", "nonsense:1"])
def test_invalid_family_parameters(spec):
    with pytest.raises(GraphValidationError):
        build_family(spec)


def test_random_bipartite_deterministic_and_connected():
    g1 = build_family("random:4x5:0.5:11")
    g2 = build_family("random:4x5:0.5:11")
    assert g1.edges == g2.edges
    assert validate(g1).connected


def test_random_bipartite_retry_exhaustion():
    with pytest.raises(GraphValidationError):
        build_family("random:8x8:0.01:0")


def test_json_round_trip():
    g = build_family("ladder:4")
    g2 = BipartiteGraph.from_json(g.to_json())
    assert g2.u_sites == g.u_sites and g2.v_sites == g.v_sites
    assert g2.adjacency == g.adjacency
    assert json.loads(g.to_json())["edges"] == [[a, b] for a, b in g.edges]


def test_parse_graph_spec_forms():
    for spec in ("torus:6x6", "cycle:8", "doubled(torus:5x5)", "hypercube:4",
                 "path:6", "ladder:6", "complete:3x4", "doubled(cycle:5)",
                 "random:3x3:0.9:1"):
        g = parse_graph_spec(spec)
        assert validate(g).connected
