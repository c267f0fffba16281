"""Pure numpy implementations of the hot kernels (reference and fallback)."""
from __future__ import annotations

import numpy as np


def assemble_forms(n, src, dst, qv, pi, rho, p1, rh, Lgen):
    """Dense (A, B, D) form matrices via matrix products of the generator."""
    dt = np.result_type(qv, pi, rho, p1, rh)
    w = qv * pi[src]
    A = np.zeros((n, n), dtype=dt)
    A[src, dst] = -w * rh
    A[np.arange(n), np.arange(n)] = -A.sum(axis=1)
    Lrho = Lgen @ rho
    S = np.zeros((n, n), dtype=dt)
    S[src, dst] = 0.5 * pi[src] * Lrho[src] * p1 * qv
    S = S + S.T
    Ls = np.diag(S.sum(axis=1)) - S
    AL = A @ Lgen
    B = Ls - 0.5 * (AL + AL.T)
    D = Lgen.T @ ((rho * pi)[:, None] * Lgen)
    return A, 0.5 * (B + B.T), 0.5 * (D + D.T)


def ratio_fd(n, src, dst, qv, pi, rho, Lgen, f, p1m, p10, p1p, h, invN):
    """Rayleigh quotients with log rho_k shifted by +h and -h, for every k.

    Returns (R_plus, R_minus), each of length n.
    """
    Lf = Lgen @ f
    grad = f[dst] - f[src]
    g1 = qv * grad * grad
    g2 = qv * grad * (Lf[dst] - Lf[src])
    E = src.size
    m = 2 * n
    R = np.exp(h)
    fac = np.ones((m, n), dtype=rho.dtype)
    k = np.arange(n)
    fac[k, k] = R
    fac[n + k, k] = 1.0 / R
    rb = fac * rho[None, :]
    P = np.broadcast_to(p10, (m, E)).copy()
    # shifting u_k up lowers t = u_dst - u_src on edges leaving k, raises it on edges entering k
    e = np.arange(E)
    P[src, e] = p1m
    P[dst, e] = p1p
    P[n + src, e] = p1p
    P[n + dst, e] = p1m
    Lrb = rb @ Lgen.T
    ps = pi[src]
    A = np.sum(rb[:, src] * ps * P * g1, axis=1)
    B = np.sum(ps * P * (0.5 * Lrb[:, src] * g1 - rb[:, src] * g2), axis=1)
    D = np.sum(rb * pi * Lf * Lf, axis=1)
    vals = (B - invN * D) / A
    return vals[:n], vals[n:]
