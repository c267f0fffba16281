"""Finite reversible Markov chains, weighted graphs and the shared linear primitives."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

TAU_STOCH = 1e-9
TAU_REV = 1e-9


class ChainValidationError(ValueError):
    pass


class ChainInputError(ValueError):
    pass


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    # invariant name -> max residual, only for violated invariants
    violations: dict[str, float] = field(default_factory=dict)

    def __str__(self) -> str:
        if self.ok:
            return "chain valid"
        parts = [f"{k} (residual {v:.3g})" for k, v in self.violations.items()]
        return "chain invalid: " + "; ".join(parts)


def _float_dtype(*arrays) -> np.dtype:
    dt = np.result_type(*[np.asarray(a) for a in arrays])
    if dt == np.longdouble and np.dtype(np.longdouble) != np.dtype(np.float64):
        return np.dtype(np.longdouble)
    return np.dtype(np.float64)


class MarkovChain:
    """Finite chain (Q, pi).

    ``pi`` is kept exactly as given (unnormalized is fine).  Arrays are made
    read-only after construction.  ``np.longdouble`` inputs keep extended
    precision throughout; this matters for chains whose stationary weights
    differ by more than the float64 exponent range.

    ``cayley`` and ``meta`` carry constructor metadata (see ``curvlab.zoo``).
    """

    def __init__(self, Q, pi, labels: Sequence[str] | None = None, *,
                 validate: bool = True, tol_stoch: float = TAU_STOCH,
                 tol_rev: float = TAU_REV, cayley: Any = None,
                 meta: dict | None = None):
        dtype = _float_dtype(Q, pi)
        Q = np.array(Q, dtype=dtype)
        pi = np.array(pi, dtype=dtype)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ChainInputError(f"Q must be square, got shape {Q.shape}")
        if pi.shape != (Q.shape[0],):
            raise ChainInputError("pi length does not match Q")
        if labels is not None and len(labels) != Q.shape[0]:
            raise ChainInputError("labels length does not match Q")
        Q.flags.writeable = False
        pi.flags.writeable = False
        self.Q = Q
        self.pi = pi
        self.n = Q.shape[0]
        self.labels = list(labels) if labels is not None else None
        self.tol_stoch = tol_stoch
        self.tol_rev = tol_rev
        self.cayley = cayley
        self.meta = dict(meta or {})
        off = Q.copy()
        np.fill_diagonal(off, 0)
        off.flags.writeable = False
        self.offdiag = off
        self.out_rate = off.sum(axis=1)
        src, dst = np.nonzero(off > 0)
        self.src = src
        self.dst = dst
        self.qvals = Q[src, dst]
        self._neighbors = [dst[src == x] for x in range(self.n)]
        if validate:
            report = validate_chain(self)
            if not report.ok:
                raise ChainValidationError(str(report))

    @property
    def dtype(self):
        return self.Q.dtype

    @property
    def n_edges(self) -> int:
        """Number of undirected edges."""
        return len(self.src) // 2

    def neighbors(self, x: int) -> np.ndarray:
        return self._neighbors[x]

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edges (x, y) with x < y."""
        return [(int(a), int(b)) for a, b in zip(self.src, self.dst) if a < b]

    @property
    def laziness(self) -> np.ndarray:
        return np.diag(self.Q).copy()

    @property
    def q_min(self) -> float:
        return float(np.min(self.qvals))

    @property
    def generator(self) -> np.ndarray:
        """Matrix of the Laplacian, Q - I (diagonal taken from the off-diagonal rates)."""
        return self.offdiag - np.diag(self.out_rate)

    def normalized_pi(self) -> np.ndarray:
        return self.pi / np.sum(self.pi)

    def __repr__(self) -> str:
        tag = self.meta.get("family", "chain")
        return f"MarkovChain({tag}, n={self.n}, edges={self.n_edges})"


@dataclass(frozen=True)
class WeightedGraph:
    n: int
    m: np.ndarray
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "m", np.asarray(self.m, dtype=float))
        if self.m.shape != (self.n,) or np.any(self.m <= 0):
            raise ChainInputError("vertex measures must be n positive numbers")
        seen = set()
        load = np.zeros(self.n)
        for i, j, w in self.edges:
            if i == j or not (0 <= i < self.n and 0 <= j < self.n):
                raise ChainInputError(f"bad edge ({i},{j})")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ChainInputError(f"duplicate edge {key}")
            if w <= 0:
                raise ChainInputError(f"edge {key} has non-positive weight")
            seen.add(key)
            load[i] += w
            load[j] += w
        excess = load - self.m
        if np.any(excess > 1e-12 * np.maximum(self.m, 1)):
            raise ChainInputError("vertex measure below incident edge weight sum")

    def weight_matrix(self) -> np.ndarray:
        W = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            W[i, j] = W[j, i] = w
        return W


def validate_chain(c: MarkovChain) -> ValidationReport:
    Q, pi = c.Q, c.pi
    bad: dict[str, float] = {}
    if c.n < 1:
        return ValidationReport(False, {"empty": 1.0})
    if np.any(Q < 0):
        bad["nonnegativity"] = float(-Q.min())
    row = np.abs(Q.sum(axis=1) - 1)
    if row.max() > c.tol_stoch:
        bad["stochasticity"] = float(row.max())
    if np.any(pi <= 0):
        bad["positivity"] = float(-pi.min())
    flux = Q * pi[:, None]
    scale = np.maximum(np.abs(flux), np.abs(flux.T))
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(scale > 0, np.abs(flux - flux.T) / np.where(scale > 0, scale, 1), 0)
    if rel.max() > c.tol_rev:
        bad["detailed_balance"] = float(rel.max())
    if not _strongly_connected(Q):
        bad["irreducibility"] = 1.0
    return ValidationReport(not bad, bad)


def _reach(adj: np.ndarray) -> np.ndarray:
    seen = np.zeros(adj.shape[0], bool)
    seen[0] = True
    todo = deque([0])
    while todo:
        x = todo.popleft()
        for y in np.nonzero(adj[x])[0]:
            if not seen[y]:
                seen[y] = True
                todo.append(y)
    return seen


def _strongly_connected(Q: np.ndarray) -> bool:
    adj = Q > 0
    np.fill_diagonal(adj, False)
    return bool(_reach(adj).all() and _reach(adj.T).all())


def from_weighted_graph(g: WeightedGraph) -> MarkovChain:
    W = g.weight_matrix()
    if not _strongly_connected(W):
        raise ChainValidationError("chain invalid: irreducibility (graph is disconnected)")
    Q = W / g.m[:, None]
    np.fill_diagonal(Q, 1 - Q.sum(axis=1))
    return MarkovChain(Q, g.m.copy())


def to_weighted_graph(c: MarkovChain) -> WeightedGraph:
    rep = validate_chain(c)
    if "detailed_balance" in rep.violations:
        raise ChainValidationError("chain is not reversible")
    edges = tuple((x, y, float(c.Q[x, y] * c.pi[x])) for x, y in c.edges())
    return WeightedGraph(c.n, np.asarray(c.pi, dtype=float), edges)


def laplacian(c: MarkovChain, f) -> np.ndarray:
    f = np.asarray(f)
    return c.offdiag @ f - c.out_rate * f


def gradient(c: MarkovChain, f) -> np.ndarray:
    """Edge function (f(y) - f(x)) on the support, zero elsewhere."""
    f = np.asarray(f)
    V = np.zeros((c.n, c.n), dtype=np.result_type(f, c.dtype))
    V[c.src, c.dst] = f[c.dst] - f[c.src]
    return V


def graph_distance(c: MarkovChain) -> np.ndarray:
    n = c.n
    D = np.full((n, n), -1, dtype=np.int64)
    for s in range(n):
        D[s, s] = 0
        todo = deque([s])
        while todo:
            x = todo.popleft()
            for y in c.neighbors(x):
                if D[s, y] < 0:
                    D[s, y] = D[s, x] + 1
                    todo.append(y)
    if np.any(D < 0):
        raise ChainValidationError("support graph is disconnected")
    return D


def symmetrized_generator(c: MarkovChain) -> np.ndarray:
    """D^{1/2} (I - Q) D^{-1/2} with D = diag(pi), as a float64 symmetric matrix."""
    rep = validate_chain(c)
    if "detailed_balance" in rep.violations:
        raise ChainValidationError("spectral quantities need a reversible chain")
    s = np.sqrt(c.pi)
    S = -(s[:, None] * c.generator) / s[None, :]
    S = 0.5 * (S + S.T)
    return np.asarray(S, dtype=np.float64)


def spectrum(c: MarkovChain) -> np.ndarray:
    return np.linalg.eigvalsh(symmetrized_generator(c))


def spectral_gap(c: MarkovChain, tol: float = 1e-12) -> float:
    ev = spectrum(c)
    pos = ev[ev > tol * max(1.0, abs(ev).max())]
    if pos.size == 0:
        raise ChainValidationError("no positive eigenvalue of -Laplacian")
    return float(pos.min())


def first_eigenfunction(c: MarkovChain) -> tuple[float, np.ndarray]:
    """(lambda_1, psi_1) for -Laplacian, psi_1 in the original coordinates."""
    S = symmetrized_generator(c)
    ev, V = np.linalg.eigh(S)
    k = int(np.argmax(ev > 1e-12 * max(1.0, abs(ev).max())))
    psi = V[:, k].astype(c.pi.dtype) / np.sqrt(c.pi)
    return float(ev[k]), np.asarray(psi / np.max(np.abs(psi)), dtype=float)


def q_triple(c: MarkovChain, x: int, y: int, z: int):
    return c.Q[y, x] * c.Q[y, z] * c.pi[y]


def inner(c: MarkovChain, f, g):
    return np.sum(np.asarray(f) * np.asarray(g) * c.pi)


# --- JSON ----------------------------------------------------------------

def _enc(v, extended: bool):
    if extended:
        return np.format_float_scientific(v, unique=True)
    return float(v)


def chain_to_dict(c: MarkovChain) -> dict:
    ext = c.dtype == np.longdouble and np.dtype(np.longdouble) != np.dtype(np.float64)
    d: dict[str, Any] = {
        "n": c.n,
        "Q": [[_enc(v, ext) for v in row] for row in c.Q],
        "pi": [_enc(v, ext) for v in c.pi],
    }
    if ext:
        d["dtype"] = "longdouble"
    if c.labels is not None:
        d["labels"] = [str(s) for s in c.labels]
    if c.meta:
        d["meta"] = _jsonable(c.meta)
    if c.cayley is not None:
        d["cayley"] = c.cayley.to_dict()
    return d


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        if obj.dtype == np.longdouble:
            return np.format_float_scientific(obj, unique=True)
        return obj.item()
    return obj


def chain_from_dict(d: dict, validate: bool = True) -> MarkovChain:
    try:
        if "graph" in d:
            gd = d["graph"]
            m = np.asarray(gd["m"], dtype=float)
            edges = tuple((int(i), int(j), float(w)) for i, j, w in gd["edges"])
            return from_weighted_graph(WeightedGraph(len(m), m, edges))
        dtype = np.longdouble if d.get("dtype") == "longdouble" else np.float64
        conv = (lambda v: np.longdouble(str(v))) if dtype is np.longdouble else float
        Q = np.array([[conv(v) for v in row] for row in d["Q"]], dtype=dtype)
        pi = np.array([conv(v) for v in d["pi"]], dtype=dtype)
        if "n" in d and int(d["n"]) != len(pi):
            raise ChainInputError("field n does not match pi")
    except (KeyError, TypeError) as exc:
        raise ChainInputError(f"malformed chain description: {exc}") from exc
    cayley = None
    if "cayley" in d:
        from .bounds import CayleyStructure
        cayley = CayleyStructure.from_dict(d["cayley"])
    return MarkovChain(Q, pi, d.get("labels"), validate=validate, cayley=cayley,
                       meta=d.get("meta"))


def save_chain(c: MarkovChain, path) -> None:
    with open(path, "w") as fh:
        json.dump(chain_to_dict(c), fh, indent=1)


def load_chain(path, validate: bool = True) -> MarkovChain:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ChainInputError(f"cannot read chain file {path}: {exc}") from exc
    return chain_from_dict(d, validate=validate)
