"""Subset kernels: the compiled extension when it is built, plain Python otherwise.

Set LAMTREE_PURE_PYTHON=1 to force the fallback.
"""

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if not os.environ.get("LAMTREE_PURE_PYTHON"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py


def _arrays(edges, weights):
    us = np.array([u for u, _ in edges], dtype=np.int64)
    vs = np.array([v for _, v in edges], dtype=np.int64)
    ws = np.asarray(weights, dtype=float)
    return us, vs, ws


def inner_sums(n, edges, weights, impl=None):
    """y(E[S]) for every vertex bitmask S."""
    impl = impl or _impl
    if impl is _kernels_py:
        return np.asarray(impl.inner_sums(n, [u for u, _ in edges], [v for _, v in edges], list(map(float, weights))))
    return impl.inner_sums(n, *_arrays(edges, weights))


def cut_sums(n, edges, weights, impl=None):
    """y(delta(S)) for every vertex bitmask S."""
    impl = impl or _impl
    if impl is _kernels_py:
        return np.asarray(impl.cut_sums(n, [u for u, _ in edges], [v for _, v in edges], list(map(float, weights))))
    return impl.cut_sums(n, *_arrays(edges, weights))


def matching_dp(dist, impl=None):
    """Minimum perfect matching on len(dist) points by subset DP."""
    impl = impl or _impl
    k = len(dist)
    if k == 0:
        return 0.0, []
    if impl is _kernels_py:
        return impl.matching_dp(k, [list(map(float, row)) for row in dist])
    return impl.matching_dp(k, np.asarray(dist, dtype=float))
