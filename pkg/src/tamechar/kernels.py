"""Inner loops with an optional compiled backend.

``trace_histogram`` counts the values of Tr(Q(v)) over all vectors of a
finite-field space.  The Cython extension ``_ckernels`` is used when it was
built; otherwise an equivalent vectorised numpy implementation runs.
"""

from __future__ import annotations

import numpy as np

try:  # pragma: no cover - depends on the build
    from . import _ckernels

    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None
    HAVE_COMPILED = False


def trace_histogram_numpy(gram, add, mul, tau, tr, q: int, p: int, d: int) -> np.ndarray:
    total = q**d
    idx = np.arange(total, dtype=np.int64)
    cols = []
    for _ in range(d):
        cols.append(idx % q)
        idx //= q
    acc = np.zeros(total, dtype=np.int64)
    tcols = [tau[c] for c in cols]
    for i in range(d):
        row = np.zeros(total, dtype=np.int64)
        for j in range(d):
            g = int(gram[i, j])
            if g:
                row = add[row, mul[g, tcols[j]]]
        acc = add[acc, mul[cols[i], row]]
    return np.bincount(tr[acc], minlength=p).astype(np.int64)


def trace_histogram(gram, add, mul, tau, tr, q: int, p: int, d: int, backend: str = "auto") -> np.ndarray:
    """Histogram of absolute traces of v^T G tau(v) over GF(q)^d."""
    gram = np.ascontiguousarray(gram, dtype=np.int64).reshape(d, d) if d else np.zeros((0, 0), dtype=np.int64)
    args = (gram, add, mul, np.ascontiguousarray(tau, dtype=np.int64), np.ascontiguousarray(tr, dtype=np.int64))
    if backend == "compiled" or (backend == "auto" and HAVE_COMPILED):
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernels are not available")
        return np.asarray(_ckernels.trace_histogram(*args, q, p, d))
    return trace_histogram_numpy(*args, q, p, d)
