"""Ricci flatness of regular graphs at a vertex, with checkable certificates.

After relabelling the maps so that eta_i(x) is the i-th neighbour n_i of x,
a family of maps is the same thing as a d x d table T[i][j] = eta_i(n_j)
where column j lists the neighbours of n_j without repetition and row i
lists the neighbours of n_i without repetition.  Reflexivity pins the
diagonal to x and symmetry makes the table symmetric.  The search fills this
table cell by cell; every certificate it returns is re-checked against the
original conditions on the maps.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .chain import MarkovChain, WeightedGraph

VARIANTS = ("plain", "R", "S", "RS")
DEFAULT_BUDGET = 2_000_000


class FlatnessError(ValueError):
    pass


@dataclass(frozen=True)
class FlatnessCertificate:
    vertex: int
    variant: str
    maps: tuple[dict, ...]  # maps[i][y] = eta_i(y) for y in the closed one-ball

    def to_dict(self) -> dict:
        return {"vertex": self.vertex, "variant": self.variant,
                "maps": [{str(k): v for k, v in sorted(m.items())} for m in self.maps]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "FlatnessCertificate":
        maps = tuple({int(k): int(v) for k, v in m.items()} for m in d["maps"])
        return cls(int(d["vertex"]), d["variant"], maps)


@dataclass(frozen=True)
class NotFlat:
    vertex: int
    variant: str
    exhausted: bool  # True: search space exhausted (a proof); False: budget ran out ("unknown")
    nodes: int

    @property
    def status(self) -> str:
        return "not_flat" if self.exhausted else "unknown"


def adjacency(g) -> list[list[int]]:
    """Sorted neighbour lists from a WeightedGraph, MarkovChain or list of neighbour lists."""
    if isinstance(g, WeightedGraph):
        nb = [set() for _ in range(g.n)]
        for i, j, w in g.edges:
            if w > 0:
                nb[i].add(j)
                nb[j].add(i)
        return [sorted(s) for s in nb]
    if isinstance(g, MarkovChain):
        return [sorted(int(v) for v in g.neighbors(x)) for x in range(g.n)]
    adj = [sorted(set(int(v) for v in row)) for row in g]
    for x, row in enumerate(adj):
        for y in row:
            if x not in adj[y] or y == x:
                raise FlatnessError("adjacency must be symmetric and loop-free")
    return adj


def degree(adj) -> int:
    degs = {len(r) for r in adj}
    if len(degs) != 1:
        raise FlatnessError("graph is not regular")
    return degs.pop()


def verify_certificate(adj, cert: FlatnessCertificate) -> list[str]:
    """Check conditions (i)-(iii) and the variant's extra conditions; returns the failures."""
    x = cert.vertex
    d = degree(adj)
    ball = [x] + adj[x]
    maps = cert.maps
    bad = []
    if len(maps) != d:
        bad.append("number of maps differs from the degree")
        return bad
    nbr = [set(r) for r in adj]
    for y in ball:
        imgs = [m.get(y) for m in maps]
        if any(v is None for v in imgs):
            bad.append(f"map undefined at {y}")
            return bad
        if any(v not in nbr[y] for v in imgs):
            bad.append(f"(i) fails at {y}")
        if len(set(imgs)) != d:
            bad.append(f"(ii) fails at {y}")
    if bad:
        return bad
    for i in range(d):
        lhs = {maps[j][maps[i][x]] for j in range(d)}
        rhs = {maps[i][maps[j][x]] for j in range(d)}
        if lhs != rhs:
            bad.append(f"(iii) fails for map {i}")
    if "R" in cert.variant:
        bad += [f"(R) fails for map {i}" for i in range(d) if maps[i][maps[i][x]] != x]
    if "S" in cert.variant:
        bad += [f"(S) fails for maps {i},{j}" for i in range(d) for j in range(i + 1, d)
                if maps[j][maps[i][x]] != maps[i][maps[j][x]]]
    return bad


def ricci_flat_at(g, x: int, variant: str = "plain", budget: int = DEFAULT_BUDGET):
    """Search for a flatness certificate at ``x``; returns FlatnessCertificate or NotFlat."""
    if variant not in VARIANTS:
        raise FlatnessError(f"variant must be one of {VARIANTS}")
    adj = adjacency(g)
    d = degree(adj)
    nb = adj[x]
    nset = [set(adj[v]) for v in nb]
    cand = [[sorted(nset[i] & nset[j]) for j in range(d)] for i in range(d)]
    reflexive = "R" in variant
    symmetric = "S" in variant
    T = [[None] * d for _ in range(d)]
    row_used = [set() for _ in range(d)]
    col_used = [set() for _ in range(d)]
    if symmetric:
        cells = [(i, j) for i in range(d) for j in range(i, d)]
    else:
        cells = [(i, j) for i in range(d) for j in range(d)]
    nodes = 0

    def options(i, j):
        if reflexive and i == j:
            return [x] if x in cand[i][j] else []
        opts = [v for v in cand[i][j] if v not in row_used[i] and v not in col_used[j]]
        if symmetric and i != j:
            opts = [v for v in opts if v not in row_used[j] and v not in col_used[i]]
        return opts

    def place(i, j, v):
        T[i][j] = v
        row_used[i].add(v)
        col_used[j].add(v)
        if symmetric and i != j:
            T[j][i] = v
            row_used[j].add(v)
            col_used[i].add(v)

    def remove(i, j, v):
        T[i][j] = None
        row_used[i].discard(v)
        col_used[j].discard(v)
        if symmetric and i != j:
            T[j][i] = None
            row_used[j].discard(v)
            col_used[i].discard(v)

    def rec(k):
        nonlocal nodes
        if k == len(cells):
            return True
        nodes += 1
        if nodes > budget:
            raise _Budget
        i, j = cells[k]
        for v in options(i, j):
            # in symmetric mode a value placed twice in one row through the mirror is caught by row_used
            if reflexive and i == j and (v in row_used[i] or v in col_used[j]):
                continue
            place(i, j, v)
            if rec(k + 1):
                return True
            remove(i, j, v)
        return False

    try:
        found = rec(0)
    except _Budget:
        return NotFlat(x, variant, False, nodes)
    if not found:
        return NotFlat(x, variant, True, nodes)
    maps = []
    for i in range(d):
        m = {x: nb[i]}
        for j in range(d):
            m[nb[j]] = T[i][j]
        maps.append(m)
    cert = FlatnessCertificate(x, variant, tuple(maps))
    problems = verify_certificate(adj, cert)
    if problems:  # pragma: no cover - would indicate a search bug
        raise AssertionError(f"search produced an invalid certificate: {problems}")
    return cert


class _Budget(Exception):
    pass


def ricci_flat_report(g, budget: int = DEFAULT_BUDGET) -> list[dict]:
    """Per vertex: the variants that admit a certificate, and any undecided ones."""
    adj = adjacency(g)
    degree(adj)
    out = []
    for x in range(len(adj)):
        ok, unknown = [], []
        for v in VARIANTS:
            r = ricci_flat_at(adj, x, v, budget)
            if isinstance(r, FlatnessCertificate):
                ok.append(v)
            elif not r.exhausted:
                unknown.append(v)
        label = "RS" if "RS" in ok else "S" if "S" in ok else "R" if "R" in ok else \
            "F" if "plain" in ok else "unknown" if unknown else "none"
        out.append({"vertex": x, "flat": ok, "unknown": unknown, "label": label})
    return out


__all__ = [
    "FlatnessCertificate", "FlatnessError", "NotFlat", "VARIANTS", "adjacency",
    "ricci_flat_at", "ricci_flat_report", "verify_certificate",
]
