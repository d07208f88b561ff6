"""Compare the compiled chord kernel against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [n_queries]
"""
import sys
import time

import numpy as np

from hilbertflow import _chords_py
from hilbertflow import kernels


def polygon_halfspaces(m):
    ang = np.linspace(0, 2 * np.pi, m, endpoint=False)
    normals = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    offsets = np.ones(m)
    return normals, offsets


def run(impl, normals, offsets, xs, vs, tol):
    t0 = time.perf_counter()
    out = impl.ray_exit_batch(normals, offsets, xs, vs, 1.0, tol)
    dt = time.perf_counter() - t0
    return dt, out


def main():
    n_queries = int(sys.argv[1]) if len(sys.argv) > 1 else 20000
    rng = np.random.default_rng(0)
    for m in (16, 128, 1024):
        normals, offsets = polygon_halfspaces(m)
        xs = rng.uniform(-0.3, 0.3, size=(n_queries, 2))
        vs = rng.standard_normal((n_queries, 2))
        vs /= np.linalg.norm(vs, axis=1, keepdims=True)
        t_py, out_py = run(_chords_py, normals, offsets, xs, vs, 1e-12)
        rows = [f"facets={m:5d} python {t_py:8.3f}s"]
        if kernels.backend() == "compiled":
            from hilbertflow import _chords_cy
            t_cy, out_cy = run(_chords_cy, normals, offsets, xs, vs, 1e-12)
            err = np.abs(out_py - out_cy).max()
            rows.append(f"compiled {t_cy:8.3f}s  speedup {t_py / t_cy:6.1f}x  "
                        f"max|diff| {err:.2e}")
        else:
            rows.append("compiled kernel not built")
        print("  ".join(rows))


if __name__ == "__main__":
    main()
