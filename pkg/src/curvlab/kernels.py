"""Backend selection for the hot kernels.

The compiled extension is used when it imported successfully and the chain
is in float64; extended-precision chains always take the numpy path.  Set
``CURVLAB_PURE=1`` to force the numpy path everywhere.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

try:  # pragma: no cover - depends on the build
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover
    _compiled = None

COMPILED_AVAILABLE = _compiled is not None


def default_backend() -> str:
    if os.environ.get("CURVLAB_PURE", "") not in ("", "0") or _compiled is None:
        return "python"
    return "compiled"


def _use_compiled(backend, *arrays) -> bool:
    backend = backend or default_backend()
    if backend == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available in this build")
        return all(np.asarray(a).dtype == np.float64 for a in arrays)
    if backend != "python":
        raise ValueError(f"unknown backend {backend!r}")
    return False


def _csr(c):
    cache = c.__dict__.get("_csr_cache")
    if cache is None:
        indptr = np.searchsorted(c.src, np.arange(c.n + 1)).astype(np.int_)
        cache = (indptr, np.ascontiguousarray(c.dst, dtype=np.int_))
        c.__dict__["_csr_cache"] = cache
    return cache


def _generator(c):
    L = c.__dict__.get("_gen_cache")
    if L is None:
        L = c.generator
        c.__dict__["_gen_cache"] = L
    return L


def assemble_forms(c, rho, p1, rh, backend=None):
    if _use_compiled(backend, c.Q, rho, p1, rh):
        indptr, indices = _csr(c)
        lrho = _generator(c) @ rho
        return _compiled.assemble_forms(c.n, indptr, indices, c.qvals, c.pi,
                                        np.ascontiguousarray(rho), np.ascontiguousarray(p1),
                                        np.ascontiguousarray(rh), lrho)
    return _kernels_py.assemble_forms(c.n, c.src, c.dst, c.qvals, c.pi, rho, p1, rh,
                                      _generator(c))


def ratio_fd(c, rho, f, p1m, p10, p1p, h, invN, backend=None):
    if _use_compiled(backend, c.Q, rho, f, p10):
        indptr, indices = _csr(c)
        return _compiled.ratio_fd(c.n, indptr, indices, c.qvals, c.pi,
                                  np.ascontiguousarray(rho), np.ascontiguousarray(f),
                                  p1m, p10, p1p, float(h), float(invN))
    return _kernels_py.ratio_fd(c.n, c.src, c.dst, c.qvals, c.pi, rho, _generator(c), f,
                                p1m, p10, p1p, h, invN)
