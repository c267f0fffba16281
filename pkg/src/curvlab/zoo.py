"""Constructors for the chain families used throughout the package.

Each constructor returns a validated ``MarkovChain``; metadata needed
downstream (Cayley structure, birth-death flag, reference witnesses) is
attached through ``chain.cayley`` and ``chain.meta``.
"""
from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .bounds import CayleyStructure
from .chain import MarkovChain, WeightedGraph, first_eigenfunction, laplacian


class ZooError(ValueError):
    pass


def _fill_diagonal(Q: np.ndarray) -> np.ndarray:
    np.fill_diagonal(Q, 0)
    np.fill_diagonal(Q, 1 - Q.sum(axis=1))
    return Q


def abelian_cayley(orders: Sequence[int], gens: Sequence[Sequence[int]],
                   rates: Sequence[float] | float) -> MarkovChain:
    """Translation-invariant chain on Z_{n1} x ... x Z_{nk}.

    Inverses are added with the same rate when missing.  A scalar ``rates``
    is applied to every generator.
    """
    orders = tuple(int(o) for o in orders)
    if np.isscalar(rates):
        rates = [float(rates)] * len(gens)
    if len(rates) != len(gens):
        raise ZooError("one rate per generator required")
    rate: dict[tuple, float] = {}
    for g, c in zip(gens, rates):
        g = tuple(int(v) % o for v, o in zip(g, orders))
        if len(g) != len(orders):
            raise ZooError("generator dimension does not match the group")
        if all(v == 0 for v in g):
            raise ZooError("identity is not allowed as a generator")
        if g in rate and abs(rate[g] - c) > 1e-15:
            raise ZooError(f"conflicting rates for generator {g}")
        rate[g] = float(c)
    for g, c in list(rate.items()):
        inv = tuple((-v) % o for v, o in zip(g, orders))
        if inv in rate and abs(rate[inv] - c) > 1e-15:
            raise ZooError(f"rate asymmetry between {g} and its inverse")
        rate.setdefault(inv, c)
    if sum(rate.values()) > 1 + 1e-12:
        raise ZooError("generator rates sum to more than 1")
    cs = CayleyStructure(orders, tuple(rate), tuple(rate.values()))
    n = cs.size
    Q = np.zeros((n, n))
    for g in cs.elements():
        x = cs.rank(g)
        for s, c in rate.items():
            Q[x, cs.rank(cs.add(g, s))] += c
    meta = {"family": "abelian_cayley", "orders": list(orders)}
    labels = [",".join(map(str, g)) for g in cs.elements()]
    return MarkovChain(_fill_diagonal(Q), np.ones(n), labels, cayley=cs, meta=meta)


def cycle(n: int, q: float = 0.5) -> MarkovChain:
    if n < 3:
        raise ZooError("cycle needs n >= 3")
    if not 0 < q <= 0.5:
        raise ZooError("rate q must lie in (0, 1/2]")
    c = abelian_cayley([n], [[1]], [q])
    c.meta.update(family="cycle", n=n, q=q)
    return c


def hypercube(d: int, q_edge: float | None = None) -> MarkovChain:
    if d < 1:
        raise ZooError("dimension must be >= 1")
    q_edge = 1.0 / d if q_edge is None else q_edge
    if not 0 < q_edge * d <= 1 + 1e-12:
        raise ZooError("d * q_edge must lie in (0, 1]")
    gens = [tuple(int(i == j) for i in range(d)) for j in range(d)]
    c = abelian_cayley([2] * d, gens, q_edge)
    c.meta.update(family="hypercube", d=d, q_edge=q_edge)
    return c


def parity(c: MarkovChain) -> np.ndarray:
    """Bipartition indicator of a hypercube chain (sum of coordinates mod 2)."""
    cs = c.cayley
    return np.array([sum(g) % 2 for g in cs.elements()], dtype=float)


def birth_death(q_plus: Sequence[float], q_minus: Sequence[float]) -> MarkovChain:
    """Path chain with up-rates ``q_plus[i]`` (i -> i+1) and down-rates ``q_minus[i]`` (i -> i-1).

    Both lists have one entry per state; ``q_plus[-1]`` and ``q_minus[0]`` must be 0.
    """
    qp = np.asarray(q_plus, dtype=float)
    qm = np.asarray(q_minus, dtype=float)
    n = qp.size
    if qm.size != n or n < 2:
        raise ZooError("need two rate lists of equal length >= 2")
    if qp[-1] != 0 or qm[0] != 0:
        raise ZooError("no up-rate at the last state and no down-rate at the first")
    if np.any(qp[:-1] <= 0) or np.any(qm[1:] <= 0):
        raise ZooError("interior rates must be positive")
    if np.any(qp + qm > 1 + 1e-12):
        raise ZooError("rates at a state sum to more than 1")
    Q = np.zeros((n, n))
    Q[np.arange(n - 1), np.arange(1, n)] = qp[:-1]
    Q[np.arange(1, n), np.arange(n - 1)] = qm[1:]
    pi = np.ones(n)
    for i in range(n - 1):
        pi[i + 1] = pi[i] * qp[i] / qm[i + 1]
    meta = {"family": "birth_death", "birth_death": True}
    return MarkovChain(_fill_diagonal(Q), pi, meta=meta)


def random_birth_death(n: int, rng: np.random.Generator, lazy: bool = True) -> MarkovChain:
    cap = 0.5 if lazy else 1.0
    qp = np.zeros(n)
    qm = np.zeros(n)
    for i in range(n):
        budget = cap * rng.uniform(0.3, 1.0)
        share = rng.uniform(0.15, 0.85)
        if i < n - 1:
            qp[i] = budget * (share if i > 0 else 1.0)
        if i > 0:
            qm[i] = budget * ((1 - share) if i < n - 1 else 1.0)
    return birth_death(qp, qm)


def random_reversible(n: int, rng: np.random.Generator, density: float = 0.5,
                      min_laziness: float = 0.0) -> MarkovChain:
    """Random connected reversible chain: random weighted graph plus slack measure."""
    W = np.triu(rng.uniform(0.1, 1.0, (n, n)) * (rng.random((n, n)) < density), 1)
    perm = rng.permutation(n)
    for a, b in zip(perm[:-1], perm[1:]):  # spanning path keeps it connected
        i, j = min(a, b), max(a, b)
        W[i, j] = max(W[i, j], rng.uniform(0.1, 1.0))
    W = W + W.T
    deg = W.sum(axis=1)
    m = deg / (1 - min_laziness) * rng.uniform(1.0, 2.0, n)
    Q = W / m[:, None]
    meta = {"family": "random_reversible"}
    return MarkovChain(_fill_diagonal(Q), m, meta=meta)


def three_point(alpha: float) -> MarkovChain:
    """Three-state path x - y - z with a heavy, nearly absorbing end z.

    The stationary weight of z is exp(alpha^2)/alpha^2; for alpha^2 beyond
    the float64 exponent range the chain is built in extended precision.
    ``meta['witness']`` holds the reference pair (rho, f).
    """
    if not alpha > 0:
        raise ZooError("alpha must be positive")
    dt = np.longdouble if alpha * alpha > 150 else np.float64
    a = dt(alpha)
    a2 = a * a
    eps = dt(0.84) * a2 / np.exp(a2)
    if not eps < 0.5:
        raise ZooError("alpha too small: the return rate from z exceeds 1/2")
    Q = np.zeros((3, 3), dtype=dt)
    Q[0, 1] = dt(0.28)
    Q[1, 0] = dt(0.1)
    Q[1, 2] = dt(0.3)
    Q[2, 1] = eps
    Q[0, 0] = 1 - Q[0, 1]
    Q[1, 1] = 1 - Q[1, 0] - Q[1, 2]
    Q[2, 2] = 1 - eps
    pi = np.array([1, dt(2.8), np.exp(a2) / a2], dtype=dt)
    rho = np.array([1, 1, np.exp(-a2)], dtype=dt)
    f = np.array([0, 1, a + 1], dtype=dt)
    meta = {"family": "three_point", "alpha": float(alpha), "epsilon": float(eps),
            "witness": {"rho": rho, "f": f, "log_rho": [0.0, 0.0, -float(alpha) ** 2]}}
    return MarkovChain(Q, pi, ["x", "y", "z"], meta=meta)


def perturbed_c6(q: float = 0.2, eps: float = 1e-3) -> MarkovChain:
    """Lazy 6-cycle whose (0,5) edge carries rate q + eps in both directions."""
    if not 0 < q < 0.25:
        raise ZooError("q must lie in (0, 1/4)")
    if eps < 0 or q + eps > 0.5:
        raise ZooError("need eps >= 0 and q + eps <= 1/2")
    Q = np.zeros((6, 6))
    for i in range(6):
        Q[i, (i + 1) % 6] = Q[i, (i - 1) % 6] = q
    Q[0, 5] = Q[5, 0] = q + eps
    meta = {"family": "perturbed_c6", "q": q, "epsilon": eps}
    return MarkovChain(_fill_diagonal(Q), np.ones(6), meta=meta)


def perturbed_c6_literal(q: float = 0.2, eps: float = 1e-3) -> MarkovChain:
    """Lazy 6-cycle where only the rate 0 -> 5 is raised to q + eps.

    This chain has no reversible measure (the cycle products differ), so it is
    built without validation and carries its stationary distribution.  Only
    quantities defined through the transition rates alone (Bakry-Emery,
    transport curvatures) are meaningful on it.
    """
    if not 0 < q < 0.25 or eps < 0 or q + eps > 0.5:
        raise ZooError("need 0 < q < 1/4, eps >= 0 and q + eps <= 1/2")
    Q = np.zeros((6, 6))
    for i in range(6):
        Q[i, (i + 1) % 6] = Q[i, (i - 1) % 6] = q
    Q[0, 5] = q + eps
    Q = _fill_diagonal(Q)
    w, V = np.linalg.eig(Q.T)
    pi = np.abs(np.real(V[:, np.argmin(np.abs(w - 1))]))
    meta = {"family": "perturbed_c6_literal", "q": q, "epsilon": eps}
    return MarkovChain(Q, pi / pi.max(), validate=False, meta=meta)


def prism(base: MarkovChain, r1: float, r2: float, q: float) -> MarkovChain:
    """Two copies of ``base`` with rates scaled by r1 and r2, joined by vertical rate q.

    State (x, k) has index (k - 1) * n0 + x.
    """
    if not r1 > r2 > 0 or q <= 0:
        raise ZooError("need r1 > r2 > 0 and q > 0")
    if r1 + q > 1 + 1e-12:
        raise ZooError("r1 + q must not exceed 1")
    n0 = base.n
    off = np.asarray(base.offdiag, dtype=float)
    Q = np.zeros((2 * n0, 2 * n0))
    Q[:n0, :n0] = r1 * off
    Q[n0:, n0:] = r2 * off
    Q[np.arange(n0), n0 + np.arange(n0)] = q
    Q[n0 + np.arange(n0), np.arange(n0)] = q
    pi0 = np.asarray(base.pi, dtype=float)
    labels = [f"{x},{k}" for k in (1, 2) for x in range(n0)]
    meta = {"family": "prism", "r1": r1, "r2": r2, "q": q, "base_n": n0,
            "base_family": base.meta.get("family")}
    return MarkovChain(_fill_diagonal(Q), np.concatenate([pi0, pi0]), labels, meta=meta)


def prism_base(c: MarkovChain) -> MarkovChain:
    """Recover the base chain from the top layer of a prism."""
    n0, r1 = c.meta["base_n"], c.meta["r1"]
    Q0 = np.asarray(c.offdiag[:n0, :n0], dtype=float) / r1
    return MarkovChain(_fill_diagonal(Q0), np.asarray(c.pi[:n0], dtype=float))


def prism_witness(c: MarkovChain, rho1: float, rho2: float, psi0=None):
    """Layer-constant density and the lifted base eigenfunction.

    Returns (rho, f, lam) with lam the eigenvalue of psi0.
    """
    base = prism_base(c)
    lam, psi = first_eigenfunction(base)
    if psi0 is not None:
        psi = np.asarray(psi0, dtype=float)
        Lpsi = laplacian(base, psi)
        lam = -float(np.dot(Lpsi, psi) / np.dot(psi, psi))
    n0 = base.n
    rho = np.concatenate([np.full(n0, float(rho1)), np.full(n0, float(rho2))])
    return rho, np.concatenate([psi, psi]), lam


def prism_ratio_closed_form(r1, r2, q, rho1, rho2, lam) -> float:
    num = 0.5 * q * (rho2 - rho1) * (r1 - r2) + lam * (rho1 * r1**2 + rho2 * r2**2)
    return num / (rho1 * r1 + rho2 * r2)


def johnson_states(L: int, N: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(L), N))


def bernoulli_laplace_lazy_scale(L: int, N: int, lam: Sequence[float]) -> float:
    """Largest time scale in (0, 1] for which the model keeps laziness >= 1/2."""
    lam = np.sort(np.asarray(lam, dtype=float))
    top = np.sum(lam[-N:]) * (L - N) / L  # busiest state: particles on the fastest sites
    return 1.0 if top <= 0.5 else 0.5 / top


def bernoulli_laplace(L: int, N: int, lam: Sequence[float], scale: float = 1.0,
                      zero_floor: float = 1e-9) -> MarkovChain:
    """Exclusion process of N particles on L sites, states = N-subsets.

    A particle on site j jumps to each empty site at rate ``scale * lam[j] / L``.
    Zero intensities are raised to ``zero_floor * max(lam)`` so the chain is
    irreducible and reversible; transition rows depend continuously on the
    intensities, so transport curvatures move by O(zero_floor).
    """
    lam = np.asarray(lam, dtype=float)
    if lam.size != L or not 1 <= N <= L - 1:
        raise ZooError("need len(lam) == L and 1 <= N <= L - 1")
    if np.any(lam < 0) or lam.max() <= 0:
        raise ZooError("intensities must be nonnegative and not all zero")
    eff = np.maximum(lam, zero_floor * lam.max())
    states = johnson_states(L, N)
    index = {s: i for i, s in enumerate(states)}
    n = len(states)
    Q = np.zeros((n, n))
    for s in states:
        occ = set(s)
        for j in s:
            for i in range(L):
                if i in occ:
                    continue
                t = tuple(sorted((occ - {j}) | {i}))
                Q[index[s], index[t]] = scale * eff[j] / L
    if np.any(Q.sum(axis=1) > 0.5 + 1e-12):
        raise ZooError("laziness below 1/2; use bernoulli_laplace_lazy_scale for the time scale")
    pi = np.array([np.prod(1.0 / eff[list(s)]) for s in states])
    pi = pi / pi.max()
    labels = ["".join(str(j + 1) for j in s) for s in states]
    meta = {"family": "bernoulli_laplace", "L": L, "N": N, "lambda": lam.tolist(),
            "scale": scale, "zero_floor": zero_floor}
    return MarkovChain(_fill_diagonal(Q), pi, labels, meta=meta)


def complement_c4_c5() -> WeightedGraph:
    """Complement of the disjoint union of a 4-cycle (0..3) and a 5-cycle (4..8), unit weights."""
    cyc = {frozenset((i, (i + 1) % 4)) for i in range(4)}
    cyc |= {frozenset((4 + i, 4 + (i + 1) % 5)) for i in range(5)}
    edges = tuple((i, j, 1.0) for i in range(9) for j in range(i + 1, 9)
                  if frozenset((i, j)) not in cyc)
    return WeightedGraph(9, np.full(9, 6.0), edges)


def graph_adjacency(g) -> list[list[int]]:
    """Sorted neighbour lists of a WeightedGraph or MarkovChain support."""
    if isinstance(g, WeightedGraph):
        nb = [set() for _ in range(g.n)]
        for i, j, _ in g.edges:
            nb[i].add(j)
            nb[j].add(i)
        return [sorted(s) for s in nb]
    return [sorted(int(v) for v in g.neighbors(x)) for x in range(g.n)]


FAMILIES = {
    "cycle": cycle,
    "hypercube": hypercube,
    "abelian-cayley": abelian_cayley,
    "birth-death": birth_death,
    "three-point": three_point,
    "perturbed-c6": perturbed_c6,
    "prism": prism,
    "bernoulli-laplace": bernoulli_laplace,
}


def expected_degree(c: MarkovChain) -> int:
    return int(max(len(c.neighbors(x)) for x in range(c.n)))


__all__ = [
    "abelian_cayley", "bernoulli_laplace", "bernoulli_laplace_lazy_scale", "birth_death",
    "complement_c4_c5", "cycle", "hypercube", "parity", "perturbed_c6", "prism",
    "prism_ratio_closed_form", "prism_witness", "random_birth_death", "random_reversible",
    "three_point",
]
