"""Closed-form curvature bounds, the explicit cycle witness and the Cayley T-split."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .chain import MarkovChain, spectral_gap, to_weighted_graph, WeightedGraph
from .means import Mean, get_mean


class BoundError(ValueError):
    pass


@dataclass(frozen=True)
class CayleyStructure:
    """Abelian Cayley data: Z_{n1} x ... x Z_{nk} with generator rates.

    ``S`` is closed under inverses and ``rates[i]`` belongs to ``S[i]``.
    Group elements are tuples; the chain state of an element is its
    mixed-radix rank (see ``rank``).
    """

    orders: tuple[int, ...]
    S: tuple[tuple[int, ...], ...]
    rates: tuple[float, ...]
    S2: tuple[tuple[int, ...], ...] = field(init=False)
    r: int = field(init=False)

    def __post_init__(self):
        orders = tuple(int(o) for o in self.orders)
        if not orders or any(o < 2 for o in orders):
            raise BoundError("cyclic factor orders must be >= 2")
        S = tuple(tuple(int(v) % o for v, o in zip(s, orders)) for s in self.S)
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "rates", tuple(float(x) for x in self.rates))
        if len(S) != len(self.rates):
            raise BoundError("one rate per generator required")
        if len(set(S)) != len(S):
            raise BoundError("duplicate generators")
        rate = dict(zip(S, self.rates))
        for s, c in rate.items():
            if all(v == 0 for v in s):
                raise BoundError("identity is not allowed as a generator")
            if c <= 0:
                raise BoundError("generator rates must be positive")
            inv = self.inverse(s)
            if inv not in rate:
                raise BoundError(f"generator set not closed under inverses: {s}")
            if abs(rate[inv] - c) > 1e-12 * max(1.0, c):
                raise BoundError(f"rate of {s} differs from the rate of its inverse")
        object.__setattr__(self, "S2", tuple(s for s in S if self.inverse(s) == s))
        object.__setattr__(self, "r", max(self.element_order(s) for s in S))

    # group arithmetic
    def inverse(self, s):
        return tuple((-v) % o for v, o in zip(s, self.orders))

    def add(self, a, b):
        return tuple((u + v) % o for u, v, o in zip(a, b, self.orders))

    def element_order(self, s) -> int:
        k = 1
        for v, o in zip(s, self.orders):
            k = math.lcm(k, o // math.gcd(v, o))
        return k

    @property
    def size(self) -> int:
        return int(np.prod(self.orders))

    def elements(self):
        return list(itertools.product(*[range(o) for o in self.orders]))

    def rank(self, g) -> int:
        idx = 0
        for v, o in zip(g, self.orders):
            idx = idx * o + v
        return idx

    @property
    def q_min(self) -> float:
        return min(self.rates)

    def to_dict(self) -> dict:
        return {"orders": list(self.orders), "S": [list(s) for s in self.S],
                "rates": list(self.rates)}

    @classmethod
    def from_dict(cls, d) -> "CayleyStructure":
        return cls(tuple(d["orders"]), tuple(tuple(s) for s in d["S"]), tuple(d["rates"]))

    def verify(self, c: MarkovChain, tol: float = 1e-12) -> None:
        """Check that the chain is the Cayley chain this structure describes."""
        if c.n != self.size:
            raise BoundError("state count does not match the group order")
        rate = dict(zip(self.S, self.rates))
        for g in self.elements():
            x = self.rank(g)
            expect = np.zeros(c.n)
            for s, cs in rate.items():
                expect[self.rank(self.add(g, s))] += cs
            got = np.asarray(c.offdiag[x], dtype=float)
            if np.max(np.abs(got - expect)) > tol:
                raise BoundError(f"transition rates at {g} are not translation invariant")


# --- closed-form bounds -----------------------------------------------------

def cayley_lower_bounds(cs: CayleyStructure) -> list[tuple[float, float]]:
    """The three (K, N) pairs available for abelian Cayley chains."""
    S = len(cs.S)
    odd = S - len(cs.S2)
    qm, r = cs.q_min, cs.r
    return [
        (qm / (50 * r**4), math.inf),
        (0.0, S - 0.07 * odd),
        (qm / (100 * r**4), 2 * S - 0.14 * odd),
    ]


def cycle_upper_bound(n: int, q: float = 0.5) -> float:
    """Upper bound on the entropic curvature of the 4n-cycle with rate q."""
    if n < 4:
        raise BoundError("cycle upper bound needs n >= 4")
    if not 0 < q <= 0.5:
        raise BoundError("rate q must lie in (0, 1/2]")
    return 5000 * q * n**-4 * math.log(n) ** 2


def cycle_witness(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian-type density and zigzag test function on the 4n-cycle.

    Vertices are listed as -2n+1, ..., 2n; state i carries the label i - 2n + 1.
    The test function has slope one everywhere, peaks +n at x = n and
    bottoms out at -n at x = -n.
    """
    if n < 4:
        raise BoundError("cycle witness needs n >= 4")
    xs = np.arange(-2 * n + 1, 2 * n + 1)
    rho = np.exp(-4 * (xs / n) ** 2 * math.log(n))
    f = np.where(np.abs(xs) <= n, xs, np.where(xs > n, 2 * n - xs, -2 * n - xs)).astype(float)
    return rho, f


def cycle_witness_labels(n: int) -> list[int]:
    return list(range(-2 * n + 1, 2 * n + 1))


def universal_lower(q_min: float) -> float:
    _check_qmin(q_min)
    return -(0.5 + 2 / q_min)


def universal_lower_findim(q_min: float, N: float) -> float:
    _check_qmin(q_min)
    if not N > 0:
        raise BoundError("dimension must be positive")
    return -(0.5 + (4 / q_min) * (1 + 4 / N**2))


def best_lower_bound(c: MarkovChain, mean: Mean | str = "log", N: float = math.inf) -> tuple[float, str]:
    """Largest proven lower bound on the curvature for dimension N, with its formula id.

    A condition CD(K, N') implies CD(K, N) for every N >= N'.
    """
    mean = get_mean(mean)
    cands = []
    if math.isinf(N):
        cands.append((universal_lower(c.q_min), "universal_any_mean"))
    elif mean.kind == "logarithmic":
        cands.append((universal_lower_findim(c.q_min, N), "universal_entropic_finite_dim"))
    if c.cayley is not None and mean.kind == "logarithmic":
        for k, (K, Nk) in enumerate(cayley_lower_bounds(c.cayley)):
            if Nk <= N:
                cands.append((K, f"abelian_cayley_pair_{k + 1}"))
    if not cands:
        return -math.inf, "none"
    return max(cands, key=lambda t: t[0])


def _check_qmin(q_min):
    if not 0 < q_min <= 1:
        raise BoundError("Q_min must lie in (0, 1]")


@dataclass(frozen=True)
class PerturbationReport:
    epsilon: float
    bound: float
    q_min: float
    scale: float  # joint rescaling applied to bring weights into [0, 1]


def _as_graph(c) -> WeightedGraph:
    return c if isinstance(c, WeightedGraph) else to_weighted_graph(c)


def perturbation_bound(c, c_tilde) -> PerturbationReport:
    """Curvature stability estimate between two chains on the same graph."""
    g, gt = _as_graph(c), _as_graph(c_tilde)
    if g.n != gt.n:
        raise BoundError("chains live on different state sets")
    e1 = {(i, j): w for i, j, w in g.edges}
    e2 = {(i, j): w for i, j, w in gt.edges}
    if set(e1) != set(e2):
        raise BoundError("chains have different edge sets")
    logs = [abs(math.log(e2[k] / e1[k])) for k in e1]
    logs += list(np.abs(np.log(gt.m / g.m)))
    eps = max(logs) if logs else 0.0
    qm = []
    for h in (g, gt):
        for i, j, w in h.edges:
            qm += [w / h.m[i], w / h.m[j]]
    q_min = min(qm)
    top = max(np.max(g.m), np.max(gt.m))
    scale = 1.0 / top if top > 1 else 1.0
    return PerturbationReport(eps, 27 * eps * (1 + 8 / q_min), q_min, scale)


DELTA_EPS_MAX = math.asinh(1 / 3) / 4


def delta_perturbation_bound(eps: float, q_min: float) -> float:
    if not 0 <= eps < DELTA_EPS_MAX:
        raise BoundError(f"epsilon must lie in [0, {DELTA_EPS_MAX:.6f})")
    _check_qmin(q_min)
    return math.sinh(4 * eps) * (17 + 36 / q_min)


def lichnerowicz_upper(c: MarkovChain) -> float:
    return spectral_gap(c)


def t_decomposition(c: MarkovChain, mean: Mean | str, rho, f) -> tuple[float, float]:
    """Split B_rho(f) into the gradient-difference part and the b-function part."""
    cs = c.cayley
    if cs is None:
        raise BoundError("chain carries no Cayley structure")
    cs.verify(c)
    mean = get_mean(mean)
    rho = np.asarray(rho, dtype=np.result_type(np.asarray(rho), c.dtype, np.float64))
    f = np.asarray(f, dtype=rho.dtype)
    elems = cs.elements()
    idx = np.arange(len(elems))  # elements() enumerates in rank order
    shift = {s: np.array([cs.rank(cs.add(g, s)) for g in elems]) for s in cs.S}
    rate = dict(zip(cs.S, cs.rates))
    pi0 = c.pi[idx]
    if np.ptp(np.asarray(c.pi, dtype=float)) > 1e-12 * float(np.max(c.pi)):
        raise BoundError("Cayley chains must have constant stationary measure")
    t13 = 0.0
    t4 = 0.0
    for d in cs.S:
        xd = shift[d]
        rh = mean.theta(rho[idx], rho[xd])
        grad_x = f[xd] - f[idx]
        for e in cs.S:
            xe = shift[e]
            xed = shift[d][xe]  # (x + e) + d
            grad_ex = f[xed] - f[xe]
            w = rate[d] * rate[e] * pi0
            t13 = t13 + 0.25 * np.sum((grad_ex - grad_x) ** 2 * rh * w)
            d1 = mean.d1(rho[xe], rho[xed])
            d2 = mean.d2(rho[xe], rho[xed])
            bracket = d1 * rho[idx] + d2 * rho[xd] - rh
            t4 = t4 + 0.25 * np.sum(grad_ex**2 * bracket * w)
    return t13, t4
