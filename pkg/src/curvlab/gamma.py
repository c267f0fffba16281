"""Density-weighted Gamma calculus and the functionals A_rho, B_rho.

Conventions: ``rho`` and ``f`` are length-n arrays, ``<u, v>_pi`` sums
against the chain's stored (possibly unnormalized) ``pi``, and the mean's
first derivative is evaluated as ``d1(rho_x, rho_y)`` on each directed edge
x -> y.  Several quantities are available through more than one formula
(``route=``); the routes are algebraically equal and exist so tests can
compare them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .chain import MarkovChain, laplacian
from .means import Mean, get_mean


class DegenerateWitnessError(ValueError):
    pass


@dataclass(frozen=True)
class Density:
    rho: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        rho = np.asarray(self.rho)
        if rho.dtype.kind in "iub":
            rho = rho.astype(float)
        if np.any(~(rho > 0)):
            raise ValueError("density must be strictly positive")
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_log(cls, u) -> "Density":
        u = np.asarray(u)
        return cls(np.exp(u - np.max(u)))

    def normalize(self, c: MarkovChain) -> "Density":
        return Density(self.rho / np.sum(self.rho * c.pi), normalized=True)


@dataclass(frozen=True)
class QuadraticFormTriple:
    A: np.ndarray
    B: np.ndarray
    D: np.ndarray


def _rho(rho) -> np.ndarray:
    if isinstance(rho, Density):
        return rho.rho
    rho = np.asarray(rho)
    if rho.dtype.kind in "iub":
        rho = rho.astype(float)
    if np.any(~(rho > 0)):
        raise ValueError("density must be strictly positive")
    return rho


def _vec(c: MarkovChain, f) -> np.ndarray:
    f = np.asarray(f)
    if f.dtype.kind in "iub":
        f = f.astype(float)
    return f.astype(np.result_type(f, c.dtype), copy=False)


def edge_weights(c: MarkovChain, mean: Mean | str, rho):
    """Per directed edge: (d1(rho_x, rho_y), rho_hat(x, y)) aligned with c.src/c.dst."""
    mean = get_mean(mean)
    rho = _rho(rho).astype(np.result_type(_rho(rho), c.dtype), copy=False)
    u = np.log(rho)
    p1 = mean.d1_t(u[c.dst] - u[c.src])
    rh = mean.theta(rho[c.src], rho[c.dst])
    return p1, rh


def _scatter(c: MarkovChain, vals: np.ndarray) -> np.ndarray:
    out = np.zeros(c.n, dtype=vals.dtype)
    np.add.at(out, c.src, vals)
    return out


def rho_hat(c: MarkovChain, mean: Mean | str, rho) -> np.ndarray:
    """theta(rho_x, rho_y) on edges, as a matrix that vanishes off the support."""
    _, rh = edge_weights(c, mean, rho)
    M = np.zeros((c.n, c.n), dtype=rh.dtype)
    M[c.src, c.dst] = rh
    return M


def delta_rho(c: MarkovChain, mean: Mean | str, rho, f) -> np.ndarray:
    p1, _ = edge_weights(c, mean, rho)
    f = _vec(c, f)
    return _scatter(c, 2 * p1 * c.qvals * (f[c.dst] - f[c.src]))


def gamma_rho(c: MarkovChain, mean: Mean | str, rho, f, g=None) -> np.ndarray:
    p1, _ = edge_weights(c, mean, rho)
    f = _vec(c, f)
    g = f if g is None else _vec(c, g)
    return _scatter(c, p1 * c.qvals * (f[c.dst] - f[c.src]) * (g[c.dst] - g[c.src]))


def gamma2_rho(c: MarkovChain, mean: Mean | str, rho, f, g=None) -> np.ndarray:
    """Iterated operator; the outer Laplacian is the standard one."""
    f = _vec(c, f)
    g = f if g is None else _vec(c, g)
    G = gamma_rho(c, mean, rho, f, g)
    return 0.5 * (laplacian(c, G) - gamma_rho(c, mean, rho, f, laplacian(c, g))
                  - gamma_rho(c, mean, rho, g, laplacian(c, f)))


def A_rho(c: MarkovChain, mean: Mean | str, rho, f, g=None, route: str = "edge"):
    f = _vec(c, f)
    g = f if g is None else _vec(c, g)
    rho = _rho(rho)
    if route == "edge":
        _, rh = edge_weights(c, mean, rho)
        w = c.qvals * c.pi[c.src]
        return 0.5 * np.sum(w * rh * (f[c.dst] - f[c.src]) * (g[c.dst] - g[c.src]))
    if route == "vertex":
        return np.sum(rho * gamma_rho(c, mean, rho, f, g) * c.pi)
    raise ValueError(f"unknown route {route!r}")


def B_rho(c: MarkovChain, mean: Mean | str, rho, f, route: str = "laplace"):
    """Integrated Bochner functional.

    Routes: ``gamma2`` integrates the iterated operator against rho,
    ``laplace`` uses the Laplacian of rho against Gamma_rho minus the mixed
    energy, ``vector`` uses the edge-field form built from the mean's
    partial derivatives.
    """
    mean = get_mean(mean)
    f = _vec(c, f)
    rho = _rho(rho)
    if route == "gamma2":
        return np.sum(rho * gamma2_rho(c, mean, rho, f) * c.pi)
    if route == "laplace":
        Lrho = laplacian(c, rho)
        return (0.5 * np.sum(Lrho * gamma_rho(c, mean, rho, f) * c.pi)
                - A_rho(c, mean, rho, f, laplacian(c, f)))
    if route == "vector":
        Lrho = laplacian(c, rho)
        Lf = laplacian(c, f)
        p1, rh = edge_weights(c, mean, rho)
        p2 = mean.d1_t(np.log(rho[c.src]) - np.log(rho[c.dst]))
        hat_lap = p1 * Lrho[c.src] + p2 * Lrho[c.dst]
        grad = f[c.dst] - f[c.src]
        w = c.qvals * c.pi[c.src]
        first = 0.25 * np.sum(hat_lap * grad * grad * w)
        second = 0.5 * np.sum(rh * grad * (Lf[c.dst] - Lf[c.src]) * w)
        return first - second
    raise ValueError(f"unknown route {route!r}")


def D_rho(c: MarkovChain, rho, f):
    """<rho, (Delta f)^2>_pi."""
    Lf = laplacian(c, _vec(c, f))
    return np.sum(_rho(rho) * Lf * Lf * c.pi)


def _triple_terms(c: MarkovChain, rh_mat: np.ndarray, f: np.ndarray):
    """Yield, per centre y, the matrix of triple-sum terms of the mixed energy."""
    for y in range(c.n):
        nb = c.neighbors(y)
        if nb.size == 0:
            continue
        a = c.Q[y, nb]
        gr = f[y] - f[nb]
        r = rh_mat[nb, y]
        T = -0.5 * c.pi[y] * np.outer(a * gr, a * gr) * (r[:, None] + r[None, :])
        yield T


def A_pm(c: MarkovChain, mean: Mean | str, rho, f):
    """Positive and negative parts of the mixed energy A_rho(f, Delta f), termwise."""
    f = _vec(c, f)
    rh = rho_hat(c, mean, rho)
    plus = minus = 0.0 * f[0]
    for T in _triple_terms(c, rh, f):
        plus = plus + np.sum(np.where(T > 0, T, 0))
        minus = minus - np.sum(np.where(T < 0, T, 0))
    return plus, minus


def mixed_energy_triple(c: MarkovChain, mean: Mean | str, rho, f):
    """A_rho(f, Delta f) through the triple sum."""
    plus, minus = A_pm(c, mean, rho, f)
    return plus - minus


def tau_A(c: MarkovChain, mean: Mean | str, rho, f) -> float:
    f = np.asarray(f, dtype=float)
    _, rh = edge_weights(c, mean, rho)
    return 1e-12 * float(np.max(np.abs(f))) ** 2 * float(np.max(rh)) * float(np.max(c.qvals * c.pi[c.src]))


def cd_ratio(c: MarkovChain, mean: Mean | str, rho, f, N: float = np.inf, *,
             route: str = "laplace"):
    """(B - D/N)/A for a single witness; raises on degenerate witnesses."""
    A = A_rho(c, mean, rho, f)
    if not A > tau_A(c, mean, rho, f):
        raise DegenerateWitnessError(f"A_rho(f) = {float(A):.3g} is below the degeneracy threshold")
    B = B_rho(c, mean, rho, f, route=route)
    if np.isinf(N):
        return B / A
    return (B - D_rho(c, rho, f) / N) / A


def quadratic_forms(c: MarkovChain, mean: Mean | str, rho, backend: str | None = None) -> QuadraticFormTriple:
    """Matrices of A_rho, B_rho and <rho, (Delta f)^2>_pi as quadratic forms in f."""
    mean = get_mean(mean)
    rho = _rho(rho)
    p1, rh = edge_weights(c, mean, rho)
    A, B, D = kernels.assemble_forms(c, rho, p1, rh, backend=backend)
    return QuadraticFormTriple(A, B, D)


def pointwise_forms(c: MarkovChain, mean: Mean | str, rho, x: int):
    """Matrices of f -> Gamma_rho f(x), Gamma_{2,rho} f(x), (Delta f(x))^2 over all of R^n."""
    mean = get_mean(mean)
    rho = _rho(rho)
    p1, _ = edge_weights(c, mean, rho)
    n = c.n
    dt = p1.dtype
    Pm = np.zeros((n, n), dtype=dt)
    Pm[c.src, c.dst] = p1 * c.qvals
    L = c.generator.astype(dt)

    def gamma_at(v):
        # matrix of Gamma_rho(f, f)(v) = sum_y P(v,y) (f_y - f_v)^2
        G = np.zeros((n, n), dtype=dt)
        w = Pm[v]
        G += np.diag(w)
        G[v, v] += w.sum()
        G[v, :] -= w
        G[:, v] -= w
        return G

    Gx = gamma_at(x)
    # (1/2) Delta Gamma at x
    half_lap = np.zeros((n, n), dtype=dt)
    for y in c.neighbors(x):
        half_lap += c.Q[x, y] * (gamma_at(y) - Gx)
    half_lap *= 0.5
    # Gamma_rho(f, Delta f)(x) = sum_y P(x,y) (e_y - e_x) . f  *  (L_y - L_x) . f
    mixed = np.zeros((n, n), dtype=dt)
    for y in c.neighbors(x):
        e = np.zeros(n, dtype=dt)
        e[y] += 1
        e[x] -= 1
        mixed += Pm[x, y] * np.outer(e, L[y] - L[x])
    G2 = half_lap - 0.5 * (mixed + mixed.T)
    ell = L[x]
    return Gx, G2, np.outer(ell, ell)
