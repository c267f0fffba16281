import math

import numpy as np
import pytest

from curvlab import zoo
from curvlab.bounds import (BoundError, CayleyStructure, best_lower_bound, cayley_lower_bounds,
                            cycle_upper_bound, cycle_witness, delta_perturbation_bound,
                            lichnerowicz_upper, perturbation_bound, t_decomposition,
                            universal_lower, universal_lower_findim)
from curvlab.chain import WeightedGraph
from curvlab.gamma import B_rho
from curvlab.means import ARITH, LOG


def test_cycle_cayley_pairs():
    q = 0.3
    cs = zoo.cycle(12, q).cayley
    (k1, n1), (k2, n2), (k3, n3) = cayley_lower_bounds(cs)
    assert (k1, n1) == (pytest.approx(q / (50 * 12**4), rel=1e-15), math.inf)
    assert (k2, n2) == (0.0, pytest.approx(1.86))
    assert (k3, n3) == (pytest.approx(q / (100 * 12**4), rel=1e-15), pytest.approx(3.72))


def test_hypercube_pairs():
    for d in (2, 3, 4):
        cs = zoo.hypercube(d).cayley
        assert len(cs.S2) == d and cs.r == 2
        k1, _ = cayley_lower_bounds(cs)[0]
        assert k1 == pytest.approx(cs.q_min / 800)
        assert cayley_lower_bounds(cs)[1] == (0.0, pytest.approx(d))


def test_cayley_structure_validation():
    with pytest.raises(BoundError):
        CayleyStructure((4,), ((1,),), (0.2,))  # inverse missing
    with pytest.raises(BoundError):
        CayleyStructure((4,), ((0,),), (0.2,))
    with pytest.raises(BoundError):
        CayleyStructure((4,), ((1,), (3,)), (0.2, 0.1))
    cs = CayleyStructure((3, 4), ((1, 0), (2, 0), (0, 1), (0, 3)), (0.1, 0.1, 0.2, 0.2))
    assert cs.r == 4 and cs.S2 == ()
    with pytest.raises(BoundError):
        cs.verify(zoo.cycle(12, 0.25))


def test_cycle_upper_bound_values():
    assert cycle_upper_bound(4, 0.5) == pytest.approx(2500 * 4**-4 * math.log(4) ** 2)
    vals = [cycle_upper_bound(n, 0.5) for n in range(4, 60)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert cycle_upper_bound(7, 0.25) == pytest.approx(cycle_upper_bound(7, 0.5) / 2)
    with pytest.raises(BoundError):
        cycle_upper_bound(3)


@pytest.mark.parametrize("n", range(4, 11))
def test_cycle_witness_observations(n):
    rho, f = cycle_witness(n)
    xs = np.arange(-2 * n + 1, 2 * n + 1)
    assert rho[xs == n - 1][0] <= 16 * n**-4
    ratios = rho[:-1] / rho[1:]
    assert np.all((ratios >= 1 / 256) & (ratios <= 256))
    u = np.log(rho)
    second = u[:-2] + u[2:] - 2 * u[1:-1]
    assert np.allclose(second, -8 * math.log(n) / n**2)
    assert np.all(np.abs(np.diff(np.concatenate([f, f[:1]]))) == 1)
    assert f.max() == n and f.min() == -n


def test_universal_bounds():
    assert universal_lower(0.5) == pytest.approx(-4.5)
    q = 0.2
    assert universal_lower_findim(q, math.inf) == pytest.approx(-(0.5 + 4 / q))
    assert universal_lower_findim(q, 2) == pytest.approx(-(0.5 + (4 / q) * 2))
    with pytest.raises(BoundError):
        universal_lower(0)


def test_best_lower_bound_picks_largest():
    c = zoo.cycle(16, 0.5)
    val, fid = best_lower_bound(c, "log")
    assert fid == "abelian_cayley_pair_1" and val == pytest.approx(0.5 / (50 * 16**4))
    val, fid = best_lower_bound(zoo.hypercube(3), "log", 3)
    assert fid == "abelian_cayley_pair_2" and val == 0
    val, fid = best_lower_bound(zoo.random_birth_death(5, np.random.default_rng(0)), "arithmetic")
    assert fid == "universal_any_mean"
    assert best_lower_bound(zoo.random_birth_death(5, np.random.default_rng(0)), "arithmetic", 3) == (
        -math.inf, "none")


def test_perturbation_bound_examples():
    c = zoo.cycle(6, 0.25)
    rep = perturbation_bound(c, c)
    assert rep.epsilon == 0 and rep.bound == 0
    q, eps = 0.2, 1e-3
    rep = perturbation_bound(zoo.cycle(6, q), zoo.perturbed_c6(q, eps))
    assert rep.epsilon == pytest.approx(math.log((q + eps) / q))
    assert 0 < rep.bound < math.inf
    g = WeightedGraph(3, np.full(3, 3.0), ((0, 1, 1.0), (1, 2, 1.0)))
    gt = WeightedGraph(3, np.full(3, 3.0), ((0, 1, math.exp(0.01)), (1, 2, 1.0)))
    assert perturbation_bound(g, gt).epsilon == pytest.approx(0.01)
    with pytest.raises(BoundError):
        perturbation_bound(g, WeightedGraph(3, np.full(3, 3.0), ((0, 1, 1.0), (0, 2, 1.0))))


def test_delta_perturbation_bound():
    assert delta_perturbation_bound(0.0, 0.5) == 0
    assert delta_perturbation_bound(0.02, 0.25) == pytest.approx(math.sinh(0.08) * 161)
    assert delta_perturbation_bound(0.01, 0.25) < delta_perturbation_bound(0.02, 0.25)
    with pytest.raises(BoundError):
        delta_perturbation_bound(0.1, 0.25)


def test_lichnerowicz():
    assert lichnerowicz_upper(zoo.cycle(10, 0.5)) == pytest.approx(2 * math.sin(math.pi / 10) ** 2)
    k2 = zoo.abelian_cayley((2,), [(1,)], 0.5)
    assert lichnerowicz_upper(k2) == pytest.approx(1.0)
    n, q = 400, 0.5
    assert lichnerowicz_upper(zoo.cycle(n, q)) == pytest.approx(4 * math.pi**2 * q / n**2, rel=1e-4)


def test_t_decomposition_routes():
    c = zoo.cycle(16, 0.5)
    rho, f = cycle_witness(4)
    t13, t4 = t_decomposition(c, LOG, rho, f)
    assert t13 >= 0 and t4 >= 0
    assert t13 + t4 == pytest.approx(float(B_rho(c, LOG, rho, f)), rel=1e-9)
    assert t_decomposition(c, ARITH, np.ones(16), f)[1] == pytest.approx(0, abs=1e-15)
    rng = np.random.default_rng(2)
    z22 = zoo.abelian_cayley((2, 2), [(1, 0), (0, 1)], 0.25)
    for _ in range(20):
        rho, f = np.exp(rng.uniform(-3, 3, 4)), rng.normal(size=4)
        t13, t4 = t_decomposition(z22, LOG, rho, f)
        assert t13 >= 0 and t4 >= -1e-15
        assert t13 + t4 == pytest.approx(float(B_rho(z22, LOG, rho, f)), rel=1e-9, abs=1e-12)
    with pytest.raises(BoundError):
        t_decomposition(zoo.random_birth_death(4, rng), LOG, np.ones(4), np.arange(4.0))
