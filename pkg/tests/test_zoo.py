import numpy as np
import pytest

from curvlab import zoo
from curvlab.chain import from_weighted_graph, graph_distance
from curvlab.flat import adjacency


def test_cycle():
    c = zoo.cycle(6, 0.25)
    assert c.laziness == pytest.approx(0.5)
    assert all(len(c.neighbors(x)) == 2 for x in range(6))
    assert np.allclose(np.asarray(c.pi), 1)
    with pytest.raises(zoo.ZooError):
        zoo.cycle(2)
    with pytest.raises(zoo.ZooError):
        zoo.cycle(6, 0.9)


def test_hypercube_and_z2_cubed_agree():
    h = zoo.hypercube(3)
    assert h.n == 8 and all(len(h.neighbors(x)) == 3 for x in range(8))
    assert graph_distance(h).max() == 3
    z = zoo.abelian_cayley((2, 2, 2), [(1, 0, 0), (0, 1, 0), (0, 0, 1)], h.cayley.rates[0])
    assert np.allclose(np.asarray(z.Q), np.asarray(h.Q))


def test_abelian_cayley_structure():
    z12 = zoo.abelian_cayley((12,), [(1,)], 0.25)
    assert np.allclose(np.asarray(z12.Q), np.asarray(zoo.cycle(12, 0.25).Q))
    z34 = zoo.abelian_cayley((3, 4), [(1, 0), (0, 1)], 0.25)
    assert z34.cayley.r == 4 and z34.cayley.S2 == ()
    assert all(len(z34.neighbors(x)) == 4 for x in range(12))
    with pytest.raises(zoo.ZooError):
        zoo.abelian_cayley((4,), [(0,)], 0.25)


def test_birth_death_detailed_balance():
    c = zoo.birth_death([0.3, 0.2, 0.0], [0.0, 0.1, 0.4])
    Q, pi = np.asarray(c.Q), np.asarray(c.pi)
    F = pi[:, None] * Q
    assert np.allclose(F, F.T)
    with pytest.raises(Exception):
        zoo.birth_death([0.3, 0.0, 0.0], [0.0, 0.1, 0.4])


def test_random_generators_are_valid_and_reproducible():
    for seed in range(5):
        a = zoo.random_reversible(7, np.random.default_rng(seed), min_laziness=0.5)
        b = zoo.random_reversible(7, np.random.default_rng(seed), min_laziness=0.5)
        assert np.array_equal(np.asarray(a.Q), np.asarray(b.Q))
        assert a.laziness.min() >= 0.5 - 1e-12
        bd = zoo.random_birth_death(6, np.random.default_rng(seed))
        assert bd.laziness.min() >= 0.5 - 1e-12


def test_three_point():
    c = zoo.three_point(3.0)
    Q = np.asarray(c.Q)
    assert Q[0, 1] == pytest.approx(0.28) and Q[1, 0] + Q[1, 2] == pytest.approx(0.4)
    assert c.meta["epsilon"] == pytest.approx(0.84 * 9 / np.exp(9))
    # the exit rate from z peaks at 0.84/e < 1/2, so every positive alpha is admissible
    assert zoo.three_point(1.0).meta["epsilon"] == pytest.approx(0.84 / np.e)
    for bad in (0.0, -1.0):
        with pytest.raises(zoo.ZooError):
            zoo.three_point(bad)
    assert zoo.three_point(30.0).Q.dtype == np.longdouble


def test_perturbed_c6():
    assert np.allclose(np.asarray(zoo.perturbed_c6(0.2, 0.0).Q), np.asarray(zoo.cycle(6, 0.2).Q))
    c = zoo.perturbed_c6(0.2, 1e-3)
    assert c.Q[0, 5] == c.Q[5, 0] == pytest.approx(0.201)
    lit = zoo.perturbed_c6_literal(0.2, 1e-3)
    assert lit.Q[0, 5] == pytest.approx(0.201) and lit.Q[5, 0] == pytest.approx(0.2)
    assert np.allclose(np.asarray(lit.pi) @ np.asarray(lit.Q), np.asarray(lit.pi))


def test_prism_layout_and_witness():
    base = zoo.cycle(5, 0.25)
    c = zoo.prism(base, 2e-3, 1e-3, 0.5)
    assert c.n == 10 and c.Q[0, 5] == 0.5 and c.Q[0, 1] == pytest.approx(0.25 * 2e-3)
    rho, f, lam = zoo.prism_witness(c, 1.0, 1e-3)
    assert np.allclose(f[:5], f[5:])
    assert lam == pytest.approx(4 * 0.25 * np.sin(np.pi / 5) ** 2)
    with pytest.raises(zoo.ZooError):
        zoo.prism(base, 1e-3, 2e-3, 0.5)


def test_bernoulli_laplace():
    c = zoo.bernoulli_laplace(4, 2, [1, 1, 1, 1], scale=0.5)
    assert c.n == 6
    with pytest.raises(zoo.ZooError):
        zoo.bernoulli_laplace(4, 2, [1, 1, 1, 1], scale=1.0)
    lam = [0, 0, 1, 1, 1, 1, 1, 1]
    s = zoo.bernoulli_laplace_lazy_scale(8, 4, lam)
    assert zoo.bernoulli_laplace(8, 4, lam, scale=s).laziness.min() >= 0.5 - 1e-12


def test_complement_c4_c5():
    g = zoo.complement_c4_c5()
    assert len(g.edges) == 27
    adj = adjacency(g)
    assert all(len(a) == 6 for a in adj)
    c = from_weighted_graph(g)
    assert graph_distance(c).max() < np.inf
