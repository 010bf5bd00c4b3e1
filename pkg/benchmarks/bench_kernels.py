"""Time the compiled subset kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import random
import timeit

import numpy as np

from lamtree import _kernels_py, kernels
from lamtree.graph import complete_graph


def cases():
    rng = random.Random(0)
    for n in (10, 14, 16):
        g = complete_graph(n)
        w = [rng.random() for _ in g.edges]
        yield f"inner_sums n={n}", lambda impl, g=g, w=w: kernels.inner_sums(g.vertex_count, g.edges, w, impl=impl)
        yield f"cut_sums   n={n}", lambda impl, g=g, w=w: kernels.cut_sums(g.vertex_count, g.edges, w, impl=impl)
    for k in (10, 14, 16):
        pts = np.array([[rng.random(), rng.random()] for _ in range(k)])
        dist = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
        yield f"matching   k={k}", lambda impl, d=dist: kernels.matching_dp(d, impl=impl)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if kernels.BACKEND != "compiled":
        raise SystemExit("compiled extension not available; build with pip install -e . --no-build-isolation")
    compiled = kernels._impl
    print(f"{'kernel':<18}{'compiled s':>12}{'python s':>12}{'speedup':>10}")
    for name, fn in cases():
        a, b = fn(compiled), fn(_kernels_py)
        same = np.allclose(a[0], b[0]) if isinstance(a, tuple) else np.allclose(a, b)
        assert same, f"backends disagree on {name}"
        fast = min(timeit.repeat(lambda: fn(compiled), number=1, repeat=args.repeat))
        slow = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat))
        print(f"{name:<18}{fast:>12.4f}{slow:>12.4f}{slow / fast:>9.1f}x")


if __name__ == "__main__":
    main()
