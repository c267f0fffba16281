"""Two-variable means and the b-functionals built from them.

Every mean here is symmetric and 1-homogeneous, so its first partial
derivative depends only on the ratio of the arguments.  The log-domain
helpers (``d1_t``, ``theta_u``, ``rho_d1_u``) exploit that and stay finite
for argument ratios far outside the float range, which the curvature
search relies on when densities span hundreds of orders of magnitude.

All evaluators accept numpy arrays and preserve ``np.longdouble`` inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

# |t| below this switches the log-mean kernels to their Taylor series
SERIES_CUTOFF = 1e-2

# (k+1)! and (k+2)! reciprocals for the two series, six terms each
_PHI_COEF = [1.0, 1 / 2, 1 / 6, 1 / 24, 1 / 120, 1 / 720]
_DPHI_COEF = [1 / 2, 1 / 6, 1 / 24, 1 / 120, 1 / 720, 1 / 5040]


class MeanError(ValueError):
    pass


def _asarray(x):
    x = np.asarray(x)
    if x.dtype.kind in "iub":
        x = x.astype(np.float64)
    return x


def _horner(coef, t):
    out = np.zeros_like(t) + coef[-1]
    for c in reversed(coef[:-1]):
        out = out * t + c
    return out


def phi(t):
    """(e^t - 1)/t, continuous at 0."""
    t = _asarray(t)
    small = np.abs(t) < SERIES_CUTOFF
    safe = np.where(small, 1.0, t)
    with np.errstate(over="ignore"):
        direct = np.expm1(safe) / safe
    return np.where(small, _horner(_PHI_COEF, t), direct)


def dphi(t):
    """(e^t - 1 - t)/t^2, the derivative kernel of the logarithmic mean."""
    t = _asarray(t)
    small = np.abs(t) < SERIES_CUTOFF
    safe = np.where(small, 1.0, t)
    with np.errstate(over="ignore"):
        direct = (np.expm1(safe) - safe) / (safe * safe)
    return np.where(small, _horner(_DPHI_COEF, t), direct)


def _dphi_scaled(t):
    """e^{-t} * dphi(t) for t > 0, without overflow."""
    t = _asarray(t)
    small = np.abs(t) < SERIES_CUTOFF
    safe = np.where(small, 1.0, t)
    with np.errstate(over="ignore", under="ignore"):
        direct = -(np.expm1(-safe) + safe * np.exp(-safe)) / (safe * safe)
    return np.where(small, _horner(_DPHI_COEF, t) * np.exp(-t), direct)


@dataclass(frozen=True)
class Mean:
    """Evaluator bundle for a symmetric, 1-homogeneous mean.

    Subclasses override the log-domain primitives when a closed form is
    available; the generic fallbacks go through ``theta_fn``/``d1_fn``.
    """

    kind: str
    theta_fn: Callable | None = None
    d1_fn: Callable | None = None

    # --- plain evaluators -------------------------------------------------
    def theta(self, r, s):
        return self.theta_fn(_asarray(r), _asarray(s))

    def d1(self, r, s):
        """Partial derivative in the first argument."""
        return self.d1_fn(_asarray(r), _asarray(s))

    def d2(self, r, s):
        return self.d1(s, r)

    def dtheta(self, r, s):
        return self.d1(r, s), self.d2(r, s)

    # --- log-domain evaluators -------------------------------------------
    def d1_t(self, t):
        """d1(1, e^t); equals d1(r, s) whenever log(s/r) = t."""
        t = _asarray(t)
        return self.d1(np.ones_like(t), np.exp(t))

    def theta_u(self, ux, uy):
        """theta(e^ux, e^uy)."""
        ux, uy = _asarray(ux), _asarray(uy)
        return np.exp(ux) * self.theta(np.ones_like(ux), np.exp(uy - ux))

    def rho_d1_u(self, ux, uy):
        """e^ux * d1(e^ux, e^uy)."""
        ux, uy = _asarray(ux), _asarray(uy)
        return np.exp(ux) * self.d1_t(uy - ux)

    # --- b-functionals -----------------------------------------------------
    def b0(self, alpha, beta, gamma):
        d1, d2 = self.dtheta(beta, gamma)
        return d1 * _asarray(alpha) + d2 * _asarray(beta)

    def b(self, alpha, beta, gamma):
        return self.b0(alpha, beta, gamma) - self.theta(alpha, beta)


class LogarithmicMean(Mean):
    def __init__(self):
        object.__setattr__(self, "kind", "logarithmic")
        object.__setattr__(self, "theta_fn", None)
        object.__setattr__(self, "d1_fn", None)

    def theta(self, r, s):
        r, s = _asarray(r), _asarray(s)
        hi = np.maximum(r, s)
        lo = np.minimum(r, s)
        pos = lo > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(pos, np.log(np.where(pos, lo, 1.0) / np.where(hi > 0, hi, 1.0)), 0.0)
        return np.where(pos, hi * phi(t), 0.0 * hi)

    def d1(self, r, s):
        r, s = _asarray(r), _asarray(s)
        return self.d1_t(np.log(s / r))

    def d1_t(self, t):
        return dphi(t)

    def theta_u(self, ux, uy):
        ux, uy = _asarray(ux), _asarray(uy)
        hi = np.maximum(ux, uy)
        return np.exp(hi) * phi(-np.abs(ux - uy))

    def rho_d1_u(self, ux, uy):
        ux, uy = _asarray(ux), _asarray(uy)
        t = uy - ux
        pos = t > 0
        with np.errstate(over="ignore", under="ignore"):
            left = np.exp(ux) * dphi(np.where(pos, 0.0, t))
            right = np.exp(uy) * _dphi_scaled(np.where(pos, t, 1.0))
        return np.where(pos, right, left)


class ArithmeticMean(Mean):
    def __init__(self):
        object.__setattr__(self, "kind", "arithmetic")
        object.__setattr__(self, "theta_fn", lambda r, s: 0.5 * (r + s))
        object.__setattr__(self, "d1_fn", lambda r, s: 0.5 + 0.0 * (r + s))

    def d1_t(self, t):
        t = _asarray(t)
        return 0.5 + 0.0 * t

    def theta_u(self, ux, uy):
        return 0.5 * (np.exp(_asarray(ux)) + np.exp(_asarray(uy)))

    def rho_d1_u(self, ux, uy):
        return 0.5 * np.exp(_asarray(ux)) + 0.0 * _asarray(uy)


class GeometricMean(Mean):
    def __init__(self):
        object.__setattr__(self, "kind", "geometric")
        object.__setattr__(self, "theta_fn", lambda r, s: np.sqrt(r * s))
        object.__setattr__(self, "d1_fn", lambda r, s: 0.5 * np.sqrt(s / r))

    def d1_t(self, t):
        return 0.5 * np.exp(0.5 * _asarray(t))

    def theta_u(self, ux, uy):
        return np.exp(0.5 * (_asarray(ux) + _asarray(uy)))

    def rho_d1_u(self, ux, uy):
        return 0.5 * np.exp(0.5 * (_asarray(ux) + _asarray(uy)))


LOG = LogarithmicMean()
ARITH = ArithmeticMean()
GEO = GeometricMean()

_REGISTRY: dict[str, Mean] = {"logarithmic": LOG, "arithmetic": ARITH, "geometric": GEO}
_ALIASES = {"log": "logarithmic", "ent": "logarithmic", "a": "arithmetic", "geo": "geometric"}


def get_mean(name: str | Mean) -> Mean:
    if isinstance(name, Mean):
        return name
    key = _ALIASES.get(name, name)
    try:
        return _REGISTRY[key]
    except KeyError:
        raise MeanError(f"unknown mean {name!r}; known: {sorted(_REGISTRY)}") from None


def register_mean(name: str, theta: Callable, d1: Callable, samples: int = 2000,
                  seed: int = 0, tol: float = 1e-8) -> Mean:
    """Register a custom mean after checking the axioms on random samples."""
    mean = Mean(kind=name, theta_fn=theta, d1_fn=d1)
    problems = check_mean_axioms(mean, samples=samples, seed=seed, tol=tol)
    if problems:
        raise MeanError(f"mean {name!r} fails: {', '.join(problems)}")
    _REGISTRY[name] = mean
    return mean


def check_mean_axioms(mean: Mean, samples: int = 10_000, seed: int = 0,
                      tol: float = 1e-10) -> list[str]:
    """Return the names of violated axioms (empty list when all hold)."""
    rng = np.random.default_rng(seed)
    r = np.exp(rng.uniform(-5, 5, samples))
    s = np.exp(rng.uniform(-5, 5, samples))
    lam = np.exp(rng.uniform(-3, 3, samples))
    th = mean.theta(r, s)
    scale = np.maximum(r, s)
    bad = []
    if np.max(np.abs(th - mean.theta(s, r)) / scale) > tol:
        bad.append("symmetry")
    if np.max(np.abs(mean.theta(lam * r, lam * s) - lam * th) / (lam * scale)) > tol:
        bad.append("homogeneity")
    if abs(float(mean.theta(1.0, 1.0)) - 1.0) > tol:
        bad.append("normalization")
    lo, hi = np.minimum(r, s), np.maximum(r, s)
    if np.any(th < lo * (1 - tol)) or np.any(th > hi * (1 + tol)):
        bad.append("betweenness")
    if np.any(mean.d1(r, s) < -tol):
        bad.append("monotonicity")
    euler = mean.d1(r, s) * r + mean.d2(r, s) * s
    if np.max(np.abs(euler - th) / scale) > tol:
        bad.append("euler-identity")
    return bad


# --- pinned constants of the logarithmic b-function ------------------------

@dataclass(frozen=True)
class Extremal:
    name: str
    argument: float
    value: float
    converged: bool


def _b_sym_profile(s, mean: Mean = LOG):
    # 2 b(e^{s/2}, 1, e^{s/2}) / s^2
    a = np.exp(s / 2)
    return 2 * mean.b(a, 1.0, a) / (s * s)


def _b_pair_profile(s, t, mean: Mean = LOG):
    # (b(e^s,1,e^t) + b(e^t,1,e^s)) / (s+t)^2
    a, c = np.exp(s), np.exp(t)
    return (mean.b(a, 1.0, c) + mean.b(c, 1.0, a)) / (s + t) ** 2


def _harmonic_case_low(s, mean: Mean = LOG):
    return mean.theta(np.exp(s), 1.0) + 2 / 3 * mean.d2(1.0, np.exp(s))


def _harmonic_case_high(s, mean: Mean = LOG):
    e = np.exp(s)
    return (5 / 3 * mean.theta(e, 1.0) + mean.d1(1.0, e) * e / 3
            + mean.d2(1.0, e) / 3)


def bfun_extremals(mean: Mean = LOG) -> dict[str, Extremal]:
    """Recompute the four pinned constants by scalar minimization.

    ``sym_min`` is the minimum of the symmetric profile, ``pair_corner`` the
    pair profile at the corner (8 log 2, 8 log 2) of its box, and
    ``harm_low``/``harm_high`` the minima of the two case profiles that
    control the harmonic-mean estimate.
    """
    from scipy.optimize import minimize_scalar

    out: dict[str, Extremal] = {}
    for name, fn, bracket in (
        ("sym_min", _b_sym_profile, (-20.0, -0.5)),
        ("harm_low", _harmonic_case_low, (-6.0, -0.05)),
        ("harm_high", _harmonic_case_high, (-8.0, -0.05)),
    ):
        res = minimize_scalar(lambda s: float(fn(s, mean)), bounds=bracket,
                              method="bounded", options={"xatol": 1e-10})
        inside = bracket[0] + 1e-6 < res.x < bracket[1] - 1e-6
        out[name] = Extremal(name, float(res.x), float(res.fun), bool(res.success and inside))
    corner = 8 * np.log(2.0)
    out["pair_corner"] = Extremal("pair_corner", float(corner),
                                  float(_b_pair_profile(corner, corner, mean)), True)
    return out


def b_inequality_margins(alpha, beta, gamma, mean: Mean = LOG) -> dict[str, np.ndarray]:
    """Slack of each b-function inequality on the given triples, scaled by beta.

    A negative entry means the inequality fails for that triple.  Keys:
    ``nonneg``, ``ordering`` (only meaningful where alpha >= gamma; set to 0
    elsewhere), ``lower_quad``, ``upper_quad`` (NaN outside the ratio box
    [1/256, 256]), ``harmonic``, ``swap``, ``arith_dominance``, ``b0_product``.
    """
    a, be, c = _asarray(alpha), _asarray(beta), _asarray(gamma)
    m = mean
    b_ac = m.b(a, be, c)
    b_ca = m.b(c, be, a)
    L = np.log(a * c / be**2)
    out = {}
    out["nonneg"] = b_ac / be
    out["ordering"] = np.where(a >= c, (b_ac - b_ca) / be, 0.0)
    out["lower_quad"] = (b_ac + b_ca - 0.08 * be * L**2) / be
    in_box = (a / be >= 1 / 256) & (a / be <= 256) & (c / be >= 1 / 256) & (c / be <= 256)
    out["upper_quad"] = np.where(in_box, (34 * be * L**2 - b_ac - b_ca) / be, np.nan)
    S, T = b_ac, b_ca
    with np.errstate(invalid="ignore", divide="ignore"):
        harm = np.where(S + T > 0, S * T / np.where(S + T > 0, S + T, 1.0), 0.0)
    out["harmonic"] = (m.theta(a, be) + m.theta(be, c) + harm - be / 0.93) / be
    out["swap"] = -np.abs(m.b(a, be, a) - m.b(be, a, be)) / np.maximum(a, be)
    out["arith_dominance"] = (4 * m.theta(a, be) + m.b(a, be, a) - 2 * (a + be)) / be
    lhs = m.b0(c, be, a) * m.theta(c, be) + m.b0(a, be, c) * m.theta(a, be)
    rhs = np.maximum(m.theta(a, be) ** 2 + m.theta(c, be) ** 2, be**2 / 2)
    out["b0_product"] = (lhs - rhs) / be**2
    return out
