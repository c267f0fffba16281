"""Reproduction cases: run a worked example and compare against expected values.

Every expectation carries a ``basis`` tag: ``published`` (a value stated
with the example), ``derived`` (computed independently from stated
constants) or ``trivial`` (follows by substitution or a one-line argument).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import bounds, classical as cl, gamma, search, zoo
from .chain import spectral_gap


@dataclass
class Check:
    name: str
    value: float
    expected: str
    passed: bool
    basis: str
    note: str = ""


@dataclass
class ReproReport:
    case: str
    params: dict
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, value, expected, passed, basis, note=""):
        self.checks.append(Check(name, float(value), expected, bool(passed), basis, note))

    def to_dict(self) -> dict:
        return {"case": self.case, "params": self.params, "ok": self.ok,
                "checks": [asdict(c) for c in self.checks]}


def _sign(v: float, tol: float = 1e-9) -> str:
    return "+" if v > tol else "-" if v < -tol else "0"


def case_three_point(alpha: float = 5.0, divergence=(10.0, 20.0, 30.0), seed: int = 0) -> ReproReport:
    rep = ReproReport("three_point", {"alpha": alpha, "divergence_alphas": list(divergence)})
    c = zoo.three_point(alpha)
    eps = c.meta["epsilon"]
    v = cl.ollivier_ricci(c, 0, 1)
    rep.add("orc(x,y)", v, "0.08 +- 1e-9", abs(v - 0.08) < 1e-9, "published")
    v = cl.ollivier_ricci(c, 1, 2)
    rep.add("orc(y,z)", v, "0.2+eps +- 1e-7", abs(v - 0.2 - eps) < 1e-7, "published")
    be = [cl.bakry_emery_local(c, x).K for x in range(3)]
    rep.add("be(x)", be[0], "0.14 +- 1e-7", abs(be[0] - 0.14) < 1e-7, "published")
    rep.add("be(z)", be[2], "0.4+eps/2 +- 1e-7", abs(be[2] - 0.4 - eps / 2) < 1e-7, "published")
    rep.add("be(y)", be[1], ">= 0.004", be[1] >= 0.004, "published")
    v = cl.ollivier_sectional(c, 0, 1)
    rep.add("sec(x,y)", v, "-1", v == -1, "published")
    # divergence along alpha: literal witness, then a short search seeded with it
    lit, found = [], []
    for a in divergence:
        ca = zoo.three_point(a)
        w = ca.meta["witness"]
        lit.append(float(gamma.cd_ratio(ca, "log", w["rho"], w["f"])))
        res = search.estimate_curvature(ca, "log", search.SearchOptions(restarts=2, seed=seed, threads=1))
        found.append(res.K_upper)
    for a, v in zip(divergence, lit):
        rep.add(f"literal witness ratio alpha={a:g}", v, "reported", True, "derived")
    dec = all(x > y for x, y in zip(found, found[1:]))
    for a, v in zip(divergence, found):
        rep.add(f"searched witness ratio alpha={a:g}", v, "reported", True, "derived")
    rep.add("searched ratios decreasing", float(dec), "true", dec, "derived")
    rep.add(f"searched ratio alpha={divergence[-1]:g}", found[-1], "< -10", found[-1] < -10, "derived")
    c100 = zoo.three_point(100.0)
    w = c100.meta["witness"]
    mixed = gamma.A_rho(c100, "log", w["rho"], w["f"], gamma.laplacian(c100, w["f"])) / 100
    rep.add("mixed energy / alpha at alpha=100", mixed, "0.084 within 5%",
            abs(mixed - 0.084) <= 0.05 * 0.084, "derived")
    return rep


def case_perturbed_c6(q: float = 0.2, eps: float = 1e-3, restarts: int = 200,
                      seeds=(1, 2, 3)) -> ReproReport:
    rep = ReproReport("perturbed_c6", {"q": q, "epsilon": eps, "restarts": restarts,
                                       "seeds": list(seeds)})
    c = zoo.perturbed_c6(q, eps)
    v = cl.ollivier_ricci(c, 0, 1)
    rep.add("orc(0,1)", v, "-eps +- 1e-12", abs(v + eps) < 1e-12, "published")
    be0 = cl.bakry_emery_local(c, 0).K
    rep.add("be(0)", be0, "< 0", be0 < 0, "published",
            "reversible completion raises the return rate 5 -> 0 as well")
    lit = zoo.perturbed_c6_literal(q, eps)
    be0_lit = cl.bakry_emery_local(lit, 0).K
    rep.add("be(0), rates exactly as written (non-reversible)", be0_lit, "reported", True, "derived")
    glob = cl.bakry_emery_global(c)
    rep.add("be global", glob, "< 0", glob < 0, "derived")
    best = math.inf
    for s in seeds:
        res = search.estimate_curvature(c, "log", search.SearchOptions(restarts=restarts, seed=s))
        best = min(best, res.K_upper)
    rep.add("entropic search minimum", best, ">= 0 (no negative witness)", best >= 0, "derived")
    return rep


def case_prism(n0: int = 5, eps_hat: float = 1e-3, q: float = 0.5, rho1: float = 2.0,
               rho2: float = 1.0) -> ReproReport:
    rep = ReproReport("prism", {"base": f"C{n0}", "eps_hat": eps_hat, "q": q,
                                "rho1": rho1, "rho2": rho2})
    base = zoo.cycle(n0, 0.25)
    c = zoo.prism(base, 2 * eps_hat, eps_hat, q)
    rho, f, lam = zoo.prism_witness(c, rho1, rho2)
    v = float(gamma.cd_ratio(c, "log", rho, f))
    closed = (0.25 * (rho2 - rho1) + eps_hat * lam * (4 * rho1 + rho2)) / (2 * rho1 + rho2)
    rep.add("witness ratio vs closed form", v, f"{closed:.12g} +- 1e-8", abs(v - closed) < 1e-8, "published")
    rep.add("witness ratio sign", v, "< 0", v < 0, "published")
    orc = [cl.ollivier_ricci(c, i, j) for i, j in c.edges()]
    sec = [cl.ollivier_sectional(c, i, j) for i, j in c.edges()]
    rep.add("min edge orc", min(orc), "> 0", min(orc) > 0, "published")
    rep.add("max |sec|", max(abs(s) for s in sec), "0 on every edge", all(s == 0 for s in sec), "published")
    glob = cl.bakry_emery_global(c)
    rep.add("be global", glob, "< 0", glob < 0, "published")
    return rep


def case_cycle_sandwich(n: int = 4, q: float = 0.5, restarts: int = 500, seed: int = 0) -> ReproReport:
    m = 4 * n
    rep = ReproReport("cycle_sandwich", {"n": n, "vertices": m, "q": q, "restarts": restarts})
    c = zoo.cycle(m, q)
    lower = bounds.cayley_lower_bounds(c.cayley)[0][0]
    res = search.estimate_curvature(c, "log", search.SearchOptions(restarts=restarts, seed=seed))
    lam = spectral_gap(c)
    rep.add("closed-form lower bound", lower, f"= q/(50 * {m}^4)", abs(lower - q / (50 * m**4)) < 1e-18, "published")
    rep.add("search upper bound", res.K_upper, ">= lower bound", res.K_upper >= lower - 1e-9, "published")
    rep.add("search upper bound vs spectral gap", res.K_upper, f"<= {lam:.12g}", res.K_upper <= lam + 1e-9,
            "published")
    rho, f = bounds.cycle_witness(n)
    c2 = zoo.cycle(m, q)
    v = float(gamma.cd_ratio(c2, "log", rho, f))
    ub = bounds.cycle_upper_bound(n, q)
    rep.add("explicit witness ratio", v, f"<= {ub:.6g}", v <= ub, "published")
    return rep


def case_hypercube(dims=(2, 3), witnesses: int = 1000, seed: int = 0) -> ReproReport:
    rep = ReproReport("hypercube", {"dims": list(dims), "witnesses": witnesses})
    for d in dims:
        c = zoo.hypercube(d)
        f = zoo.parity(c)
        v = float(gamma.cd_ratio(c, "log", np.ones(c.n), f, N=d))
        rep.add(f"d={d} ratio at constant density, parity f, N=d", v, "0 +- 1e-10", abs(v) < 1e-10, "published")
        r = search.check_CD(c, "log", 0.0, d, search.random_witnesses(c, witnesses, seed))
        rep.add(f"d={d} CD(0,d) violations", len(r.violations), "0", r.ok, "published")
    return rep


def case_bernoulli_laplace(L: int = 8, N: int = 4, lam=(0, 0, 1, 1, 1, 1, 1, 1),
                           mlsi_restarts: int = 12) -> ReproReport:
    lam = np.asarray(lam, dtype=float)
    scale = zoo.bernoulli_laplace_lazy_scale(L, N, lam)
    rep = ReproReport("bernoulli_laplace", {"L": L, "N": N, "lambda": lam.tolist(), "time_scale": scale})
    c = zoo.bernoulli_laplace(L, N, lam, scale=scale)
    bound = cl.bernoulli_laplace_orc_bound(L, N, lam)
    orc = min(cl.ollivier_ricci(c, i, j) for i, j in c.edges()) / scale
    sec = min(cl.ollivier_sectional(c, i, j) for i, j in c.edges())
    rep.add("formula value", bound, "3/8", abs(bound - 0.375) < 1e-15, "published")
    rep.add("min edge orc / time scale", orc, f">= {bound} - 1e-9", orc >= bound - 1e-9, "published")
    rep.add("min edge orc / time scale vs 1/4", orc, ">= 1/4", orc >= 0.25, "published")
    rep.add("min edge sec", sec, ">= 0", sec >= 0, "published")
    est, _ = search.mlsi_estimate(c, search.SearchOptions(restarts=mlsi_restarts))
    rep.add("mlsi upper estimate / time scale", est / scale, ">= 1/4", est / scale >= 0.25 - 1e-9, "published")
    return rep


TABLE1 = {"three_point": "-++-", "perturbed_c6": "+---", "prism": "--+0"}


def case_table1(restarts: int = 64, seed: int = 0) -> ReproReport:
    rep = ReproReport("table1", {"columns": "ent be orc sec", "restarts": restarts})
    chains = {
        "three_point": zoo.three_point(10.0),
        "perturbed_c6": zoo.perturbed_c6(),
        "prism": zoo.prism(zoo.cycle(5, 0.25), 2e-3, 1e-3, 0.5),
    }
    for name, c in chains.items():
        res = search.estimate_curvature(c, "log", search.SearchOptions(restarts=restarts, seed=seed))
        lower, _ = bounds.best_lower_bound(c, "log")
        # "+" for the entropic column: no negative witness found, plus a positive proven bound when one exists
        ent = "-" if res.K_upper < -1e-9 else "+"
        be = _sign(cl.bakry_emery_global(c))
        edges = c.edges()
        orc = _sign(min(cl.ollivier_ricci(c, i, j) for i, j in edges))
        sec = _sign(min(cl.ollivier_sectional(c, i, j) for i, j in edges))
        got = ent + be + orc + sec
        rep.add(f"{name} signs {got}", float(got == TABLE1[name]), TABLE1[name], got == TABLE1[name],
                "published", f"entropic upper estimate {res.K_upper:.6g}, proven lower {lower:.6g}")
    return rep


CASES: dict[str, Callable[..., ReproReport]] = {
    "three_point": case_three_point,
    "perturbed_c6": case_perturbed_c6,
    "prism": case_prism,
    "cycle_sandwich": case_cycle_sandwich,
    "hypercube": case_hypercube,
    "bernoulli_laplace": case_bernoulli_laplace,
    "table1": case_table1,
}
