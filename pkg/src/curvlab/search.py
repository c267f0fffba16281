"""Numerical upper estimates of theta-curvature by optimizing over witnesses (rho, f).

For fixed rho the ratio (B - D/N)/A is a quotient of quadratic forms in f,
so the inner problem is a generalized symmetric eigenproblem.  The outer
problem over u = log rho is nonconvex; it is handled by multi-start
projected descent with central finite-difference gradients.  Every value
returned is attained by a stored witness, hence a rigorous upper bound on
the curvature; none of it is a certified lower bound.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .chain import ChainValidationError, MarkovChain, first_eigenfunction
from .gamma import (A_pm, A_rho, D_rho, B_rho, DegenerateWitnessError, cd_ratio,
                    gamma_rho, quadratic_forms)
from .means import Mean, get_mean

EIG_CUTOFF = 1e-12
SUPPORT_TOL = 1e-12
BOX_FLOAT64 = 300.0
BOX_EXTENDED = 1200.0


@dataclass(frozen=True)
class SearchOptions:
    restarts: int = 32
    max_iters: int = 150
    step: float = 1.0           # initial step in log-density units
    min_step: float = 1e-9
    fd_step: float = 1e-5
    seed: int = 0
    delta: float | None = None  # bound on |log rho(y) - log rho(x)| over supp grad f
    N: float = math.inf
    scales: tuple[float, ...] = (1.0, 4.0, 8.0)
    structured: bool = True
    threads: int | None = None
    backend: str | None = None

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.delta is not None and self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if not self.N > 0:
            raise ValueError("dimension must be positive")


@dataclass(frozen=True)
class CurvatureWitness:
    rho: np.ndarray
    f: np.ndarray
    N: float
    value: float

    def recompute(self, c: MarkovChain, mean: Mean | str = "log") -> float:
        return float(cd_ratio(c, mean, _cast(c, self.rho), _cast(c, self.f), self.N))

    def to_dict(self) -> dict:
        return {"rho": [str(v) if isinstance(v, np.longdouble) else float(v) for v in self.rho],
                "f": [float(v) for v in self.f],
                "N": None if math.isinf(self.N) else float(self.N),
                "value": float(self.value)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "CurvatureWitness":
        rho = d["rho"]
        if any(isinstance(v, str) for v in rho):
            rho = np.array([np.longdouble(v) for v in rho])
        N = math.inf if d.get("N") is None else float(d["N"])
        return cls(np.asarray(rho), np.asarray(d["f"], dtype=float), N, float(d["value"]))


@dataclass
class SearchResult:
    K_upper: float
    best: CurvatureWitness
    restart_values: list[float] = field(default_factory=list)
    iterations: list[int] = field(default_factory=list)
    best_restart: int = 0

    def __iter__(self):
        yield self.K_upper
        yield self.best

    def diagnostics(self) -> dict:
        v = np.asarray(self.restart_values)
        return {"restarts": len(v), "best_restart": self.best_restart,
                "median": float(np.median(v)), "spread": float(v.max() - v.min()),
                "mean_iterations": float(np.mean(self.iterations))}


def _cast(c: MarkovChain, v) -> np.ndarray:
    v = np.asarray(v)
    return v.astype(np.result_type(v, c.dtype, np.float64), copy=False)


# --- inner problem ---------------------------------------------------------

def min_ratio_fixed_rho(c: MarkovChain, mean: Mean | str, rho, N: float = math.inf,
                        backend: str | None = None) -> tuple[float, np.ndarray]:
    """Smallest generalized eigenvalue of (B - D/N, A) away from ker A, with its eigenvector."""
    mean = get_mean(mean)
    F = quadratic_forms(c, mean, _cast(c, rho), backend=backend)
    M = F.B if math.isinf(N) else F.B - F.D / N
    A = F.A
    # equilibrate by the larger diagonal so that both forms are O(1) after scaling;
    # directions where M dwarfs A then fall under the cutoff, and those carry huge ratios
    dg = np.maximum(np.diagonal(A), np.abs(np.diagonal(M)))
    if not np.any(np.diagonal(A) > 0):
        raise DegenerateWitnessError("A form vanishes identically")
    s = np.where(dg > 0, 1 / np.sqrt(np.where(dg > 0, dg, 1)), 1)
    As = np.asarray(s[:, None] * A * s[None, :], dtype=float)
    Ms = np.asarray(s[:, None] * M * s[None, :], dtype=float)
    w, V = np.linalg.eigh(0.5 * (As + As.T))
    keep = w > EIG_CUTOFF * max(np.trace(As), 1e-300)
    if not keep.any():
        raise DegenerateWitnessError("A form is numerically zero")
    P = V[:, keep] / np.sqrt(w[keep])
    R = P.T @ Ms @ P
    lam, Y = np.linalg.eigh(0.5 * (R + R.T))
    f = np.asarray(s, dtype=float) * (P @ Y[:, 0])
    f = f - np.dot(np.asarray(c.normalized_pi(), dtype=float), f)
    return float(lam[0]), f / np.max(np.abs(f))


# --- delta projection ------------------------------------------------------

def support_edges(c: MarkovChain, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    e = np.array(c.edges(), dtype=int).reshape(-1, 2)
    mask = np.abs(f[e[:, 1]] - f[e[:, 0]]) > SUPPORT_TOL * max(np.max(np.abs(f)), 1e-300)
    return e[mask]


def project_log_gradient(u, edges: np.ndarray, delta: float, sweeps: int = 200) -> np.ndarray:
    """Nearby u with |u_i - u_j| <= delta on the given edges.

    Dykstra's alternating projections get close in the Euclidean sense; an
    inf-convolution over the edge graph then makes every constraint hold
    exactly.
    """
    u = np.array(u, dtype=np.result_type(u, np.float64))
    if edges.size == 0:
        return u
    m = len(edges)
    incr = np.zeros((m, 2), dtype=u.dtype)
    x = u.copy()
    for _ in range(sweeps):
        moved = 0.0
        for k, (i, j) in enumerate(edges):
            yi, yj = x[i] + incr[k, 0], x[j] + incr[k, 1]
            diff = yi - yj
            if diff > delta:
                shift = 0.5 * (diff - delta)
            elif diff < -delta:
                shift = 0.5 * (diff + delta)
            else:
                shift = 0.0
            ni, nj = yi - shift, yj + shift
            incr[k, 0], incr[k, 1] = yi - ni, yj - nj
            moved = max(moved, abs(ni - x[i]), abs(nj - x[j]))
            x[i], x[j] = ni, nj
        if moved < 1e-13:
            break
    # exact repair: u_i = min_j x_j + delta * hops(i, j) inside each component
    n = u.size
    adj = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    out = x.copy()
    for i in range(n):
        if not adj[i]:
            continue
        dist = {i: 0}
        frontier = [i]
        while frontier:
            nxt = []
            for a in frontier:
                for b in adj[a]:
                    if b not in dist:
                        dist[b] = dist[a] + 1
                        nxt.append(b)
            frontier = nxt
        out[i] = min(x[j] + delta * h for j, h in dist.items())
    return out


# --- outer search ----------------------------------------------------------

def _box(c: MarkovChain) -> float:
    return BOX_EXTENDED if c.dtype == np.longdouble else BOX_FLOAT64


def _normalize_u(u, box):
    u = u - np.max(u)
    return np.maximum(u, -box)


def structured_seeds(c: MarkovChain) -> list[np.ndarray]:
    """Log-density starting points that mimic known extremal shapes."""
    n = c.n
    seeds = [np.zeros(n)]
    meta = c.meta or {}
    wit = meta.get("witness")
    if wit is not None:
        if "log_rho" in wit:
            seeds.append(np.asarray(wit["log_rho"], dtype=float))
        else:
            seeds.append(np.log(np.asarray(wit["rho"], dtype=float)))
    fam = meta.get("family")
    if fam == "cycle" and n >= 8:
        m = n / 4
        xs = np.arange(n) - (n // 2 - 1)
        for width in (1.0, 0.7, 1.4):
            seeds.append(-4 * (xs / (m * width)) ** 2 * math.log(max(m, 2)))
    if fam == "prism":
        n0 = meta["base_n"]
        for gap in (1.0, 3.0, 8.0):
            seeds.append(np.concatenate([np.zeros(n0), np.full(n0, -gap)]))
    try:
        _, psi = first_eigenfunction(c)
        psi = np.asarray(psi, dtype=float)
        psi = psi / max(np.max(np.abs(psi)), 1e-300)
        for s in (2.0, -2.0, 6.0, -6.0):
            seeds.append(s * psi)
    except (ChainValidationError, np.linalg.LinAlgError):  # spectrum failures only cost seeds
        pass
    return seeds


def _initial_u(c: MarkovChain, opts: SearchOptions, idx: int, structured: list) -> np.ndarray:
    if idx < len(structured):
        return np.asarray(structured[idx])
    rng = np.random.default_rng([opts.seed, idx])
    L = opts.scales[idx % len(opts.scales)]
    return rng.uniform(-L, L, c.n)


class _Objective:
    def __init__(self, c: MarkovChain, mean: Mean, opts: SearchOptions):
        self.c, self.mean, self.opts = c, mean, opts
        self.dtype = np.result_type(c.dtype, np.float64)
        self.box = _box(c)
        self.edges_all = np.array(c.edges(), dtype=int).reshape(-1, 2)

    def rho(self, u):
        return np.exp(np.asarray(u, dtype=self.dtype))

    def project(self, u, f=None):
        u = _normalize_u(np.asarray(u, dtype=self.dtype), self.box)
        if self.opts.delta is None:
            return u
        edges = self.edges_all if f is None else support_edges(self.c, f)
        return _normalize_u(project_log_gradient(u, edges, self.opts.delta), self.box)

    def honest(self, u, f):
        """Ratio actually attained by (exp(u), f), edge by edge in the chain's precision."""
        c = self.c
        uu = np.asarray(u, dtype=self.dtype)
        f = np.asarray(f, dtype=self.dtype)
        rho = np.exp(uu)
        p1 = self.mean.d1_t(uu[c.dst] - uu[c.src])
        rh = self.mean.theta(rho[c.src], rho[c.dst])
        g = f[c.dst] - f[c.src]
        w = c.qvals * c.pi[c.src]
        Lf = c.offdiag @ f - c.out_rate * f
        Lrho = c.offdiag @ rho - c.out_rate * rho
        A = 0.5 * np.sum(w * rh * g * g)
        tau = 1e-12 * float(np.max(np.abs(f))) ** 2 * float(np.max(rh)) * float(np.max(w))
        if not A > tau:
            return math.inf
        B = 0.5 * np.sum(Lrho[c.src] * w * p1 * g * g) - 0.5 * np.sum(w * rh * g * (Lf[c.dst] - Lf[c.src]))
        if not math.isinf(self.opts.N):
            B = B - np.sum(rho * c.pi * Lf * Lf) / self.opts.N
        return float(B / A)

    def solve(self, u):
        u, _, f = self._solve(u)
        return u, self.honest(u, f), f

    def _solve(self, u):
        """Inner solve; with a delta bound the density is re-projected until admissible."""
        lam, f = min_ratio_fixed_rho(self.c, self.mean, self.rho(u), self.opts.N, self.opts.backend)
        if self.opts.delta is None:
            return u, lam, f
        for _ in range(3):
            e = support_edges(self.c, f)
            if e.size == 0 or np.all(np.abs(u[e[:, 0]] - u[e[:, 1]]) <= self.opts.delta + 1e-12):
                return u, lam, f
            u = self.project(u, f)
            lam, f = min_ratio_fixed_rho(self.c, self.mean, self.rho(u), self.opts.N, self.opts.backend)
        u = self.project(u)  # all edges: every f is admissible
        lam, f = min_ratio_fixed_rho(self.c, self.mean, self.rho(u), self.opts.N, self.opts.backend)
        return u, lam, f

    def gradient(self, u, f):
        c, h = self.c, self.opts.fd_step
        uu = np.asarray(u, dtype=self.dtype)
        t = uu[c.dst] - uu[c.src]
        p1m, p10, p1p = (np.ascontiguousarray(self.mean.d1_t(t + s)) for s in (-h, 0.0, h))
        invN = 0.0 if math.isinf(self.opts.N) else 1.0 / self.opts.N
        fr = np.asarray(f, dtype=self.dtype)
        Rp, Rm = kernels.ratio_fd(c, self.rho(uu), fr, p1m, p10, p1p, h, invN,
                                  backend=self.opts.backend)
        g = np.asarray((Rp - Rm) / (2 * h), dtype=float)
        g[~np.isfinite(g)] = 0.0
        return g


def _run_restart(obj: _Objective, u0: np.ndarray):
    opts = obj.opts
    u = obj.project(u0)
    try:
        u, val, f = obj.solve(u)
    except (DegenerateWitnessError, np.linalg.LinAlgError):
        return math.inf, u, np.zeros(obj.c.n), 0
    if not np.isfinite(val):
        return math.inf, u, f, 0
    step = opts.step
    it = 0
    stall = 0
    prev = None
    for it in range(1, opts.max_iters + 1):
        g = obj.gradient(u, f)
        if opts.delta is None:
            # coordinates pinned at the box floor and pushed outward cannot move
            g = np.where((np.asarray(u, float) <= -obj.box + 1e-12) & (g > 0), 0.0, g)
        gmax = np.max(np.abs(g))
        if not gmax > 0:
            break
        if prev is not None:
            # Barzilai-Borwein trial step, capped to a few log-units per coordinate
            s_vec = np.asarray(u, float) - prev[0]
            y_vec = g - prev[1]
            sy = float(np.dot(s_vec, y_vec))
            if sy > 0:
                step = float(np.dot(s_vec, s_vec)) / sy
        step = min(max(step, opts.min_step), 4.0 / gmax)
        slope = -float(np.dot(g, g))
        accepted = False
        while step * gmax >= opts.min_step:
            u_try = obj.project(np.asarray(u, dtype=obj.dtype) - step * g)
            try:
                u_try, v_try, f_try = obj.solve(u_try)
            except (DegenerateWitnessError, np.linalg.LinAlgError):
                v_try = math.inf
            if v_try <= val + 1e-4 * step * slope and v_try < val:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        prev = (np.asarray(u, float), g)
        gain = val - v_try
        u, val, f = u_try, v_try, f_try
        stall = stall + 1 if gain < 1e-10 * (1 + abs(val)) else 0
        if stall >= 3:
            break
    return val, u, f, it


def _threads(opts: SearchOptions) -> int:
    if opts.threads is not None:
        return max(1, int(opts.threads))
    env = os.environ.get("CURVLAB_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def estimate_curvature(c: MarkovChain, mean: Mean | str = "log",
                       opts: SearchOptions | None = None) -> SearchResult:
    """Best witness ratio found by multi-start descent; an upper bound on the curvature."""
    opts = opts or SearchOptions()
    mean = get_mean(mean)
    obj = _Objective(c, mean, opts)
    structured = structured_seeds(c) if opts.structured else []

    def job(idx):
        return _run_restart(obj, _initial_u(c, opts, idx, structured))

    nthreads = _threads(opts)
    if nthreads > 1 and opts.restarts > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            results = list(ex.map(job, range(opts.restarts)))
    else:
        results = [job(i) for i in range(opts.restarts)]

    values = [r[0] if np.isfinite(r[0]) else math.inf for r in results]
    best = min(range(len(results)), key=lambda i: (values[i], i))
    _, u, f, _ = results[best]
    rho = np.exp(np.asarray(u, dtype=obj.dtype))
    value = float(cd_ratio(c, mean, rho, _cast(c, f), opts.N))
    wit = CurvatureWitness(rho, np.asarray(f, dtype=float), opts.N, value)
    return SearchResult(value, wit, values, [r[3] for r in results], best)


def delta_curvature_estimate(c: MarkovChain, mean: Mean | str, delta: float,
                             opts: SearchOptions | None = None) -> SearchResult:
    if not delta >= 0:
        raise ValueError("delta must be nonnegative")
    opts = opts or SearchOptions()
    fields = {k: getattr(opts, k) for k in opts.__dataclass_fields__}
    fields["delta"] = float(delta)
    return estimate_curvature(c, mean, SearchOptions(**fields))


# --- inequality checks -----------------------------------------------------

@dataclass
class InequalityReport:
    checked: int
    violations: list[tuple[int, float]]  # (witness index, margin)
    min_margin: float

    @property
    def ok(self) -> bool:
        return not self.violations


def random_witnesses(c: MarkovChain, count: int, seed: int = 0, spread: float = 3.0):
    """Random (rho, f) pairs: log rho uniform in [-spread, spread], f standard normal."""
    rng = np.random.default_rng(seed)
    return [(np.exp(rng.uniform(-spread, spread, c.n)), rng.normal(size=c.n))
            for _ in range(count)]


def check_CD(c: MarkovChain, mean: Mean | str, K: float, N: float, witnesses,
             tol: float = 1e-9) -> InequalityReport:
    """Verify B(f) >= D(f)/N + K A(f) on each witness, with a relative slack ``tol``."""
    mean = get_mean(mean)
    bad = []
    worst = math.inf
    for i, (rho, f) in enumerate(witnesses):
        rho, f = _cast(c, rho), _cast(c, f)
        A = A_rho(c, mean, rho, f)
        B = B_rho(c, mean, rho, f)
        D = 0.0 if math.isinf(N) else D_rho(c, rho, f) / N
        margin = float(B - D - K * A)
        scale = float(abs(B) + abs(D) + abs(K * A))
        worst = min(worst, margin / max(scale, 1e-300))
        if margin < -tol * scale:
            bad.append((i, margin))
    return InequalityReport(len(witnesses), bad, worst)


def key_lemma_check(c: MarkovChain, mean: Mean | str, C: float, witnesses,
                    tol: float = 1e-9) -> InequalityReport:
    """Verify 1/2 <P rho, Gamma_rho f> + (2 C^2 / Q_min) A(f) >= C |A|(f, Delta f) with P rho = Delta rho + rho."""
    if not C > 0:
        raise ValueError("C must be positive")
    mean = get_mean(mean)
    qmin = c.q_min
    bad = []
    worst = math.inf
    for i, (rho, f) in enumerate(witnesses):
        rho, f = _cast(c, rho), _cast(c, f)
        Prho = c.offdiag @ rho + (1 - c.out_rate) * rho
        lhs = 0.5 * np.sum(Prho * gamma_rho(c, mean, rho, f) * c.pi) + 2 * C * C / qmin * A_rho(c, mean, rho, f)
        plus, minus = A_pm(c, mean, rho, f)
        rhs = C * (plus + minus)
        margin = float(lhs - rhs)
        scale = float(abs(lhs) + abs(rhs))
        worst = min(worst, margin / max(scale, 1e-300))
        if margin < -tol * scale:
            bad.append((i, margin))
    return InequalityReport(len(witnesses), bad, worst)


# --- modified log-Sobolev ---------------------------------------------------

ENT_TOL = 1e-12


def _dirichlet_weights(c: MarkovChain):
    pi = np.asarray(c.normalized_pi(), dtype=float)
    W = pi[:, None] * np.asarray(c.offdiag, dtype=float)
    W = 0.5 * (W + W.T)
    Lw = np.diag(W.sum(axis=1)) - W  # E(f, g) = f^T Lw g
    return pi, Lw


def mlsi_functional(c: MarkovChain, rho) -> float:
    """E(rho, log rho) / Ent(rho) with rho normalized against the probability pi."""
    pi, Lw = _dirichlet_weights(c)
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho > 0)):
        raise ValueError("density must be strictly positive")
    rho = rho / np.dot(pi, rho)
    ent = float(np.dot(pi, rho * np.log(rho)))
    if not ent > ENT_TOL:
        raise DegenerateWitnessError("entropy is numerically zero")
    return float(rho @ Lw @ np.log(rho)) / ent


def _mlsi_value_grad(u, pi, Lw):
    u = u - np.max(u)
    a = np.exp(u)
    Z = float(np.dot(pi, a))
    num = float(a @ Lw @ u)
    den = float(np.dot(pi, a * u)) - Z * math.log(Z)
    if not den > ENT_TOL * Z:
        return math.inf, np.zeros_like(u)
    dnum = a * (Lw @ u) + Lw @ a
    dden = pi * a * (u - math.log(Z))
    return num / den, (dnum * den - num * dden) / den**2


def mlsi_estimate(c: MarkovChain, opts: SearchOptions | None = None) -> tuple[float, np.ndarray]:
    """Smallest E(rho, log rho)/Ent(rho) found by multi-start L-BFGS; an upper estimate."""
    opts = opts or SearchOptions()
    pi, Lw = _dirichlet_weights(c)
    best = (math.inf, None)
    for idx in range(opts.restarts):
        rng = np.random.default_rng([opts.seed, idx])
        L = opts.scales[idx % len(opts.scales)]
        u0 = rng.uniform(-L, L, c.n)
        res = minimize(_mlsi_value_grad, u0, args=(pi, Lw), jac=True, method="L-BFGS-B",
                       bounds=[(-BOX_FLOAT64, BOX_FLOAT64)] * c.n,
                       options={"maxiter": opts.max_iters * 4})
        if np.isfinite(res.fun) and res.fun < best[0]:
            best = (float(res.fun), np.exp(res.x - res.x.max()))
    if best[1] is None:
        raise DegenerateWitnessError("no restart produced a non-constant density")
    return mlsi_functional(c, best[1]), best[1]


__all__ = [
    "CurvatureWitness", "InequalityReport", "SearchOptions", "SearchResult",
    "check_CD", "delta_curvature_estimate", "estimate_curvature", "key_lemma_check",
    "min_ratio_fixed_rho", "mlsi_estimate", "mlsi_functional", "project_log_gradient",
    "random_witnesses", "structured_seeds", "support_edges",
]
