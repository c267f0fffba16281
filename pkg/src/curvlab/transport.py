"""Exact discrete optimal transport: W1 by successive shortest paths, W-infinity by bottleneck search.

Both solvers work on the bipartite graph between the supports of the two
measures, which keeps them exact and dependency-free for the small supports
that occur in one-step transition kernels.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

MASS_TOL = 1e-10


class TransportError(ValueError):
    pass


@dataclass(frozen=True)
class TransportPlan:
    """Coupling between ``mu`` and ``nu`` stored as a dense matrix over the state set."""

    gamma: np.ndarray
    cost: float
    bottleneck: float
    # dual potentials: psi[v] - phi[u] <= d(u, v), tight wherever gamma > 0
    phi: np.ndarray | None = None
    psi: np.ndarray | None = None

    def marginal_residual(self, mu, nu) -> float:
        return float(max(np.max(np.abs(self.gamma.sum(axis=1) - mu)),
                         np.max(np.abs(self.gamma.sum(axis=0) - nu))))

    def dual_value(self, mu, nu) -> float:
        return float(np.dot(nu, self.psi) - np.dot(mu, self.phi))


def _prepare(mu, nu, d):
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    d = np.asarray(d, dtype=float)
    if mu.shape != nu.shape or d.shape != (mu.size, mu.size):
        raise TransportError("shape mismatch between measures and distance matrix")
    if np.any(mu < -MASS_TOL) or np.any(nu < -MASS_TOL):
        raise TransportError("measures must be nonnegative")
    if abs(mu.sum() - nu.sum()) > MASS_TOL * max(1.0, mu.sum()):
        raise TransportError(f"mass mismatch: {mu.sum()!r} vs {nu.sum()!r}")
    return np.clip(mu, 0, None), np.clip(nu, 0, None), d


def w1(mu, nu, d) -> tuple[float, TransportPlan]:
    """Exact W1 distance and an optimal plan with a dual certificate."""
    mu, nu, d = _prepare(mu, nu, d)
    n = mu.size
    scale = max(mu.sum(), 1e-300)
    tol = 1e-14 * scale
    S = np.flatnonzero(mu > tol)
    T = np.flatnonzero(nu > tol)
    D = d[np.ix_(S, T)]
    supply = mu[S].copy()
    demand = nu[T].copy()
    F = np.zeros_like(D)
    a, b = S.size, T.size
    BIG = np.inf

    def shortest(sources_mask):
        # Bellman-Ford on the residual graph; forward arcs u->v cost D, backward v->u cost -D where F > 0
        ds = np.where(sources_mask, 0.0, BIG)
        dt = np.full(b, BIG)
        pred_t = np.full(b, -1)
        pred_s = np.full(a, -1)
        for _ in range(a + b + 1):
            cand = ds[:, None] + D
            best_u = np.argmin(cand, axis=0)
            val = cand[best_u, np.arange(b)]
            upd_t = val < dt - 1e-12
            dt = np.where(upd_t, val, dt)
            pred_t = np.where(upd_t, best_u, pred_t)
            back = np.where(F > tol, dt[None, :] - D, BIG)
            best_v = np.argmin(back, axis=1)
            val_s = back[np.arange(a), best_v]
            upd_s = val_s < ds - 1e-12
            ds = np.where(upd_s, val_s, ds)
            pred_s = np.where(upd_s, best_v, pred_s)
            if not upd_t.any() and not upd_s.any():
                break
        else:
            raise TransportError("negative residual cycle; solver invariant broken")
        return ds, dt, pred_s, pred_t

    remaining = supply.sum()
    for _ in range(10 * (a + b) * (a + b) + 10):
        if remaining <= tol:
            break
        ds, dt, pred_s, pred_t = shortest(supply > tol)
        ends = np.flatnonzero((demand > tol) & np.isfinite(dt))
        if ends.size == 0:
            raise TransportError("no augmenting path; inputs inconsistent")
        v = ends[np.argmin(dt[ends])]
        # walk back to a source with spare supply
        path = []
        cap = demand[v]
        vv = v
        while True:
            u = pred_t[vv]
            path.append((u, vv))
            if pred_s[u] == -1:
                cap = min(cap, supply[u])
                break
            vb = pred_s[u]
            cap = min(cap, F[u, vb])
            path.append((u, -vb - 1))  # backward arc marker
            vv = vb
        for u, v2 in path:
            if v2 >= 0:
                F[u, v2] += cap
            else:
                F[u, -v2 - 1] -= cap
        supply[path[-1][0]] -= cap
        demand[v] -= cap
        remaining -= cap
    else:
        raise TransportError("min-cost flow did not terminate")

    # dual potentials from residual shortest distances with every node as a root
    ds, dt, _, _ = shortest(np.ones(a, dtype=bool))
    gamma = np.zeros((n, n))
    gamma[np.ix_(S, T)] = np.where(F > tol, F, 0.0)
    cost = float(np.sum(gamma * d))
    phi = np.zeros(n)
    psi = np.zeros(n)
    phi[S] = ds
    psi[T] = dt
    # extend potentials to the whole state set without violating feasibility
    outS = np.setdiff1d(np.arange(n), S)
    outT = np.setdiff1d(np.arange(n), T)
    if outT.size:
        psi[outT] = np.min(phi[S][:, None] + d[np.ix_(S, outT)], axis=0) if S.size else 0.0
    if outS.size:
        phi[outS] = np.max(psi[None, :] - d[outS, :], axis=1)
    used = gamma > tol
    bott = float(np.max(d[used])) if used.any() else 0.0
    return cost, TransportPlan(gamma, cost, bott, phi, psi)


def _feasible_within(mu, nu, d, t, tol) -> bool:
    """Can mu be moved onto nu using only pairs at distance <= t?  (max-flow check)"""
    S = np.flatnonzero(mu > tol)
    T = np.flatnonzero(nu > tol)
    allowed = d[np.ix_(S, T)] <= t + 1e-12
    return _bipartite_maxflow(mu[S], nu[T], allowed, tol) >= mu.sum() - 1e-12 * max(1.0, mu.sum())


def _bipartite_maxflow(sup, dem, allowed, tol) -> float:
    """Edmonds-Karp on source -> S -> T -> sink with unbounded middle arcs."""
    a, b = sup.size, dem.size
    F = np.zeros((a, b))
    rs = sup.astype(float).copy()
    rt = dem.astype(float).copy()
    total = 0.0
    while True:
        # BFS over S and T nodes
        pred_t = np.full(b, -1)
        pred_s = np.full(a, -2)
        q = deque()
        for u in np.flatnonzero(rs > tol):
            pred_s[u] = -1
            q.append(("s", u))
        end = -1
        while q and end < 0:
            kind, i = q.popleft()
            if kind == "s":
                for v in np.flatnonzero(allowed[i] & (pred_t < 0)):
                    pred_t[v] = i
                    if rt[v] > tol:
                        end = v
                        break
                    q.append(("t", v))
            else:
                for u in np.flatnonzero((F[:, i] > tol) & (pred_s == -2)):
                    pred_s[u] = i
                    q.append(("s", u))
        if end < 0:
            return total
        cap = rt[end]
        v = end
        while True:
            u = pred_t[v]
            if pred_s[u] == -1:
                cap = min(cap, rs[u])
                break
            cap = min(cap, F[u, pred_s[u]])
            v = pred_s[u]
        v = end
        while True:
            u = pred_t[v]
            F[u, v] += cap
            if pred_s[u] == -1:
                rs[u] -= cap
                break
            F[u, pred_s[u]] -= cap
            v = pred_s[u]
        rt[end] -= cap
        total += cap


def w_inf(mu, nu, d) -> float:
    """Bottleneck distance: smallest t such that some coupling moves mass only over d <= t."""
    mu, nu, d = _prepare(mu, nu, d)
    tol = 1e-14 * max(mu.sum(), 1e-300)
    S = np.flatnonzero(mu > tol)
    T = np.flatnonzero(nu > tol)
    cand = np.unique(d[np.ix_(S, T)])
    lo, hi = 0, cand.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible_within(mu, nu, d, cand[mid], tol):
            hi = mid
        else:
            lo = mid + 1
    return float(cand[lo])
