"""Compare the compiled attribution kernel against the pure-Python fallback.

Run with:  python3 benchmarks/bench_treeshap.py [--rows N] [--trees T] [--depth D]

Times both backends on the same trained model and batch, reports the speedup,
and verifies the outputs agree to near machine precision.
"""

import argparse
import time

import numpy as np

from flowtriage.data import FlowTable
from flowtriage.explain import BACKEND, build_explainer, _kernel_py
from flowtriage.train import HyperParams, train_gbdt

try:
    from flowtriage.explain import _treeshap as _kernel_c
except ImportError:
    _kernel_c = None


def run_kernel(kernel, model, X):
    phi = np.zeros_like(X)
    for tree in model.trees:
        kernel.tree_shap_batch(tree.feature_index, tree.threshold, tree.left,
                               tree.right, tree.leaf_value, tree.cover, X, phi,
                               model.tree_scale(), tree.depth())
    return phi


def time_kernel(kernel, model, X, repeats):
    best = float("inf")
    phi = None
    for _ in range(repeats):
        start = time.perf_counter()
        phi = run_kernel(kernel, model, X)
        best = min(best, time.perf_counter() - start)
    return best, phi


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--rows", type=int, default=1000)
    parser.add_argument("--features", type=int, default=10)
    parser.add_argument("--trees", type=int, default=100)
    parser.add_argument("--depth", type=int, default=5)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    n_train = 4000
    X_train = rng.normal(size=(n_train, args.features))
    y = (X_train.sum(axis=1) + rng.normal(scale=2.0, size=n_train) > 0).astype(int)
    table = FlowTable([f"f{i}" for i in range(args.features)], X_train, y,
                      np.arange(n_train))
    model = train_gbdt(table, HyperParams(n_estimators=args.trees,
                                          max_depth=args.depth, seed=1))
    X = rng.normal(size=(args.rows, args.features))

    print(f"model: {len(model.trees)} trees, depth <= {args.depth}, "
          f"{args.features} features; batch: {args.rows} rows")
    print(f"active backend at import: {BACKEND}")

    t_py, phi_py = time_kernel(_kernel_py, model, X, args.repeats)
    print(f"pure python : {t_py:8.3f}s  ({args.rows / t_py:10.0f} rows/s)")

    if _kernel_c is None:
        print("compiled    : not built (install with the extension to compare)")
        return

    t_c, phi_c = time_kernel(_kernel_c, model, X, args.repeats)
    diff = float(np.abs(phi_py - phi_c).max())
    print(f"compiled    : {t_c:8.3f}s  ({args.rows / t_c:10.0f} rows/s)")
    print(f"speedup     : {t_py / t_c:8.1f}x")
    print(f"max |diff|  : {diff:.2e}")
    assert diff <= 1e-12, "backends disagree"


if __name__ == "__main__":
    main()
