import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curvlab import zoo
from curvlab.chain import (ChainInputError, ChainValidationError, MarkovChain, WeightedGraph,
                           chain_from_dict, chain_to_dict, from_weighted_graph, gradient,
                           graph_distance, inner, laplacian, load_chain, q_triple, save_chain,
                           spectral_gap, to_weighted_graph, validate_chain)


def lazy_c4():
    return zoo.cycle(4, 0.25)


def test_lazy_c4_accepted():
    assert validate_chain(lazy_c4()).ok


def test_scaled_row_flagged():
    Q = np.array(lazy_c4().Q)
    Q[0] *= 1.01
    rep = validate_chain(MarkovChain(Q, np.ones(4), validate=False))
    assert not rep.ok and "stochasticity" in rep.violations
    with pytest.raises(ChainValidationError):
        MarkovChain(Q, np.ones(4))


def test_three_point_detailed_balance_alpha3():
    # rates and weights as tabulated for the three-state example, checked by hand
    a2 = 9.0
    eps = 0.84 * a2 / math.exp(a2)
    Q = np.array([[0.72, 0.28, 0.0], [0.1, 0.6, 0.3], [0.0, eps, 1 - eps]])
    pi = np.array([1.0, 2.8, math.exp(a2) / a2])
    flux = Q * pi[:, None]
    assert np.allclose(flux, flux.T, rtol=1e-12, atol=0)
    assert validate_chain(MarkovChain(Q, pi)).ok
    c = zoo.three_point(3.0)
    assert np.allclose(np.asarray(c.Q, float), Q) and np.allclose(np.asarray(c.pi, float), pi)


def test_disconnected_rejected():
    Q = np.eye(3)
    rep = validate_chain(MarkovChain(Q, np.ones(3), validate=False))
    assert "irreducibility" in rep.violations
    with pytest.raises(ChainValidationError):
        from_weighted_graph(WeightedGraph(3, np.ones(3), ((0, 1, 0.5),)))


def test_two_vertex_path():
    c = from_weighted_graph(WeightedGraph(2, np.array([2.0, 2.0]), ((0, 1, 1.0),)))
    assert np.allclose(c.Q, [[0.5, 0.5], [0.5, 0.5]])


def test_identity_chain_has_no_edges():
    c = MarkovChain(np.eye(1), np.ones(1))
    assert to_weighted_graph(c).edges == ()


def test_c6_edge_weights_equal():
    g = to_weighted_graph(zoo.cycle(6, 0.5))
    ws = {w for _, _, w in g.edges}
    assert len(g.edges) == 6 and len(ws) == 1


def test_measure_below_load_rejected():
    with pytest.raises(ChainInputError):
        WeightedGraph(2, np.array([0.5, 2.0]), ((0, 1, 1.0),))


def test_non_reversible_rejected_by_to_weighted_graph():
    c = zoo.perturbed_c6_literal(0.2, 1e-3)
    with pytest.raises(ChainValidationError):
        to_weighted_graph(c)


def test_laplacian_cosine_eigen():
    n, q = 9, 0.3
    c = zoo.cycle(n, q)
    for k in range(n):
        f = np.cos(2 * np.pi * k * np.arange(n) / n)
        assert np.allclose(laplacian(c, f), -2 * q * (1 - np.cos(2 * np.pi * k / n)) * f, atol=1e-14)
    assert np.allclose(laplacian(c, np.full(n, 3.0)), 0)


def test_gradient_indicator_c4():
    c = zoo.cycle(4, 0.5)
    V = gradient(c, np.eye(4)[0])
    assert V[0, 1] == -1 and V[0, 3] == -1 and V[1, 0] == 1 and V[3, 0] == 1
    assert np.allclose(V, -V.T) and V[0, 2] == 0 and V[1, 3] == 0


def test_distances():
    assert graph_distance(zoo.cycle(6, 0.5))[0, 3] == 3
    c = zoo.hypercube(3)
    D = graph_distance(c)
    ham = np.array([[bin(i ^ j).count("1") for j in range(8)] for i in range(8)])
    assert np.array_equal(D, ham)
    J = zoo.bernoulli_laplace(5, 2, [0.1] * 5)
    assert graph_distance(J).max() == 2


def test_spectral_gap_examples():
    for n in (5, 8, 16):
        assert spectral_gap(zoo.cycle(n, 0.5)) == pytest.approx(2 * math.sin(math.pi / n) ** 2, abs=1e-12)
    assert spectral_gap(zoo.cycle(2, 0.5) if False else MarkovChain([[0.5, 0.5], [0.5, 0.5]], [1, 1])) == pytest.approx(1.0)
    with pytest.raises(ChainValidationError):
        spectral_gap(MarkovChain(np.eye(1), np.ones(1)))


def test_q_triple():
    c = zoo.cycle(4, 0.5)
    assert q_triple(c, 0, 1, 2) == pytest.approx(0.25)
    assert q_triple(c, 0, 2, 1) == 0  # x not adjacent to y
    assert q_triple(c, 0, 1, 2) == q_triple(c, 2, 1, 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_laplacian_self_adjoint(n, seed):
    rng = np.random.default_rng(seed)
    c = zoo.random_reversible(n, rng)
    f, g = rng.normal(size=(2, n))
    lhs, rhs = inner(c, laplacian(c, f), g), inner(c, f, laplacian(c, g))
    assert abs(lhs - rhs) < 1e-10 * (1 + abs(lhs))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_weighted_graph_round_trip(n, seed):
    rng = np.random.default_rng(seed)
    c = zoo.random_reversible(n, rng)
    back = from_weighted_graph(to_weighted_graph(c))
    assert np.allclose(back.Q, c.Q, atol=1e-14)
    ratio = back.pi / c.pi
    assert np.allclose(ratio, ratio[0])


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_spectral_gap_matches_dense_oracle(n, seed):
    rng = np.random.default_rng(seed)
    c = zoo.random_reversible(n, rng)
    # independent route: eigenvalues of the non-symmetric generator
    ev = np.sort(np.linalg.eigvals(-np.asarray(c.generator)).real)
    assert spectral_gap(c) == pytest.approx(ev[1], abs=1e-9)


def test_json_round_trip(tmp_path):
    c = zoo.random_reversible(6, np.random.default_rng(1))
    d = json.loads(json.dumps(chain_to_dict(c)))
    c2 = chain_from_dict(d)
    assert np.array_equal(c2.Q, c.Q) and np.array_equal(c2.pi, c.pi)
    p = tmp_path / "x.json"
    save_chain(zoo.three_point(30.0), p)
    c3 = load_chain(p)
    assert c3.dtype == np.longdouble or np.dtype(np.longdouble) == np.dtype(np.float64)
    assert c3.pi[2] == zoo.three_point(30.0).pi[2]


def test_json_graph_form():
    d = {"graph": {"m": [1, 1, 1], "edges": [[0, 1, 0.5], [1, 2, 0.5]]}}
    c = chain_from_dict(d)
    assert c.Q[1, 1] == 0 and c.Q[0, 0] == 0.5


def test_malformed_json():
    with pytest.raises(ChainInputError):
        chain_from_dict({"Q": [[1]]})
