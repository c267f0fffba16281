"""Bakry-Emery, Ollivier Ricci and Ollivier sectional curvature, plus closed forms for path-like chains."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .chain import ChainValidationError, MarkovChain, graph_distance, spectral_gap
from .gamma import pointwise_forms
from .transport import TransportPlan, w1, w_inf

PSD_REL_CUTOFF = 1e-11
BISECT_WIDTH = 1e-9


class CurvatureError(ValueError):
    pass


@dataclass(frozen=True)
class BakryEmeryResult:
    vertex: int
    N: float
    K: float
    violator: np.ndarray | None = None  # f breaking the CD inequality slightly above K


def _distances(c: MarkovChain) -> np.ndarray:
    cache = c.__dict__.setdefault("_dist_cache", {})
    if "d" not in cache:
        cache["d"] = graph_distance(c).astype(float)
    return cache["d"]


def _min_eig(M: np.ndarray):
    w, V = np.linalg.eigh(M)
    return w[0], V[:, 0]


def _psd(M: np.ndarray, ref: float) -> bool:
    return _min_eig(M)[0] >= -PSD_REL_CUTOFF * max(ref, 1e-300)


def bakry_emery_local(c: MarkovChain, x: int, N: float = math.inf) -> BakryEmeryResult:
    """Largest K with Gamma_2 f(x) >= (Delta f(x))^2 / N + K Gamma f(x) for every f."""
    if not N > 0:
        raise CurvatureError("dimension must be positive")
    Gx, G2, LL = pointwise_forms(c, "arithmetic", np.ones(c.n), x)
    d = _distances(c)
    keep = np.flatnonzero((d[x] <= 2) & (np.arange(c.n) != x))
    sub = np.ix_(keep, keep)
    # common rescaling in native precision so tiny extended-precision rates survive the cast
    scale = np.max(np.abs(Gx[sub])) if keep.size else 1
    if not scale > 0:
        scale = 1
    Gx = np.asarray(Gx[sub] / scale, dtype=float)
    M0 = np.asarray(G2[sub] / scale, dtype=float)
    if not math.isinf(N):
        M0 = M0 - np.asarray(LL[sub] / scale, dtype=float) / N
    ref = np.linalg.norm(M0) + np.linalg.norm(Gx)

    # directions invisible to Gamma f(x): condition does not involve K
    gw, gV = np.linalg.eigh(Gx)
    ker = gV[:, gw <= 1e-12 * max(gw.max(), 1e-300)]
    if ker.shape[1] and not _psd(ker.T @ M0 @ ker, ref):
        _, v = _min_eig(ker.T @ M0 @ ker)
        return BakryEmeryResult(x, N, -math.inf, _lift(c.n, keep, ker @ v))

    def ok(K):
        return _psd(M0 - K * Gx, ref + abs(K) * np.linalg.norm(Gx))

    lo = -2.0  # widened below; rate-based starts overflow for tiny longdouble rates
    try:
        hi = spectral_gap(c) + 1
    except ChainValidationError:  # non-reversible input: the local forms still make sense
        hi = 3.0
    while not ok(lo):
        lo = 2 * lo - 1
        if lo < -1e12:
            return BakryEmeryResult(x, N, -math.inf)
    while ok(hi):
        hi = 2 * hi + 1
        if hi > 1e12:
            return BakryEmeryResult(x, N, math.inf)
    while hi - lo > BISECT_WIDTH:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    _, v = _min_eig(M0 - hi * Gx)
    return BakryEmeryResult(x, N, 0.5 * (lo + hi), _lift(c.n, keep, v))


def _lift(n, keep, v):
    f = np.zeros(n)
    f[keep] = v
    return f


def bakry_emery_global(c: MarkovChain, N: float = math.inf) -> float:
    return min(bakry_emery_local(c, x, N).K for x in range(c.n))


# --- path and cycle closed forms --------------------------------------------

def _line_layout(c: MarkovChain) -> tuple[bool, bool]:
    """(is path in index order, is cycle in index order) for the support graph."""
    n = c.n
    path = all(set(c.neighbors(i).tolist()) <= {i - 1, i + 1} for i in range(n)) and \
        all(c.offdiag[i, i + 1] > 0 for i in range(n - 1))
    cyc = n >= 3 and all(set(c.neighbors(i).tolist()) == {(i - 1) % n, (i + 1) % n}
                         for i in range(n))
    return path, cyc


def _rates(c: MarkovChain):
    n = c.n
    idx = np.arange(n)
    up = np.asarray(c.offdiag[idx, (idx + 1) % n], dtype=float)
    down = np.asarray(c.offdiag[idx, (idx - 1) % n], dtype=float)
    return up, down


def birth_death_be(c: MarkovChain, x: int) -> float:
    """Closed-form Bakry-Emery curvature (N = infinity) of a birth-death chain or a cycle of length >= 6."""
    path, cyc = _line_layout(c)
    if cyc and c.n < 6:
        raise CurvatureError("closed form needs cycles of length at least 6")
    if not (path or cyc):
        raise CurvatureError("chain is neither a birth-death chain nor a cycle")
    n = c.n
    up, down = _rates(c)
    if path:
        up[-1] = 0.0
        down[0] = 0.0

    def at(i):
        return (i % n) if cyc else i

    def w_minus(i):
        return -down[at(i - 1)] + 3 * up[at(i - 1)] + down[i] - up[i]

    def w_plus(i):
        return -up[at(i + 1)] + 3 * down[at(i + 1)] + up[i] - down[i]

    if path and x == 0:
        return 0.5 * w_plus(0)
    if path and x == n - 1:
        return 0.5 * w_minus(n - 1)
    wm, wp = w_minus(x), w_plus(x)
    disc = math.sqrt((wm - wp) ** 2 + 16 * down[x] * up[x])
    return 0.25 * ((wm + wp) - disc)


def birth_death_orc(c: MarkovChain, x: int) -> float:
    """Closed-form Ollivier curvature of the edge (x, x+1) on a lazy birth-death chain or cycle."""
    path, cyc = _line_layout(c)
    if not (path or cyc):
        raise CurvatureError("chain is neither a birth-death chain nor a cycle")
    if np.min(np.asarray(c.laziness, dtype=float)) < 0.5 - 1e-12:
        raise CurvatureError("closed form requires laziness at least 1/2 at every state")
    n = c.n
    if path and not 0 <= x < n - 1:
        raise CurvatureError("edge index out of range")
    up, down = _rates(c)
    if path:
        up[-1] = 0.0
        down[0] = 0.0
    y = (x + 1) % n
    return float(up[x] + down[y] - up[y] - down[x])


# --- transport curvatures ---------------------------------------------------

def _kernels(c: MarkovChain, x: int, y: int):
    if not c.offdiag[x, y] > 0:
        raise CurvatureError(f"{x} and {y} are not neighbours")
    Q = np.asarray(c.Q, dtype=float)
    return Q[x], Q[y]


def ollivier_ricci(c: MarkovChain, x: int, y: int, with_plan: bool = False):
    mu, nu = _kernels(c, x, y)
    cost, plan = w1(mu, nu, _distances(c))
    val = 1.0 - cost
    return (val, plan) if with_plan else val


def ollivier_ricci_dual(c: MarkovChain, x: int, y: int) -> float:
    """inf of Delta f(x) - Delta f(y) over 1-Lipschitz f with f(y) - f(x) = 1 (linear program).

    Equals the primal value whenever both endpoints have laziness >= 1/2.
    """
    _kernels(c, x, y)
    d = _distances(c)
    Q = np.asarray(c.Q, dtype=float)
    ball = np.flatnonzero((Q[x] > 0) | (Q[y] > 0) | (np.arange(c.n) == x) | (np.arange(c.n) == y))
    k = ball.size
    pos = {int(v): i for i, v in enumerate(ball)}
    Lx = Q[x, ball].copy()
    Lx[pos[x]] -= 1
    Ly = Q[y, ball].copy()
    Ly[pos[y]] -= 1
    obj = Lx - Ly
    rows = []
    rhs = []
    for i in range(k):
        for j in range(i + 1, k):
            r = np.zeros(k)
            r[i], r[j] = 1, -1
            rows += [r, -r]
            dij = d[ball[i], ball[j]]
            rhs += [dij, dij]
    eq = np.zeros((2, k))
    eq[0, pos[y]], eq[0, pos[x]] = 1, -1
    eq[1, pos[x]] = 1  # gauge
    res = linprog(obj, A_ub=np.array(rows), b_ub=rhs, A_eq=eq, b_eq=[1, 0],
                  bounds=(None, None), method="highs")
    if not res.success:
        raise CurvatureError(f"dual linear program failed: {res.message}")
    return float(res.fun)


def ollivier_sectional(c: MarkovChain, x: int, y: int) -> float:
    mu, nu = _kernels(c, x, y)
    return 1.0 - w_inf(mu, nu, _distances(c))


def bernoulli_laplace_orc_bound(L: int, N: int, lam) -> float:
    lam = np.sort(np.asarray(lam, dtype=float))
    if not 1 <= N <= L - 1 or lam.size != L:
        raise CurvatureError("need 1 <= N <= L - 1 and L intensities")
    if np.any(lam < 0):
        raise CurvatureError("intensities must be nonnegative")
    return float(((L - N - 1) * lam[0] + lam[: N + 1].sum()) / L)


@dataclass
class CurvatureReport:
    orc: list = field(default_factory=list)
    sec: list = field(default_factory=list)
    be: dict | None = None
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {"orc": self.orc, "sec": self.sec}
        if self.be is not None:
            out["be"] = self.be
        if self.flags:
            out["flags"] = self.flags
        return out


def curvature_report(c: MarkovChain, which=("orc", "sec", "be"), N: float = math.inf) -> CurvatureReport:
    rep = CurvatureReport()
    edges = c.edges()
    if ("orc" in which or "sec" in which) and np.min(np.asarray(c.laziness, float)) < 0.5 - 1e-12:
        rep.flags.append("laziness below 1/2: transport curvature sign facts for lazy chains do not apply")
    if "orc" in which:
        rep.orc = [[i, j, ollivier_ricci(c, i, j)] for i, j in edges]
    if "sec" in which:
        rep.sec = [[i, j, ollivier_sectional(c, i, j)] for i, j in edges]
    if "be" in which:
        rep.be = {"N": None if math.isinf(N) else N,
                  "per_vertex": [bakry_emery_local(c, x, N).K for x in range(c.n)]}
    return rep


__all__ = [
    "BakryEmeryResult", "CurvatureError", "CurvatureReport", "TransportPlan",
    "bakry_emery_global", "bakry_emery_local", "bernoulli_laplace_orc_bound",
    "birth_death_be", "birth_death_orc", "curvature_report", "ollivier_ricci",
    "ollivier_ricci_dual", "ollivier_sectional",
]
