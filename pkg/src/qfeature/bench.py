"""Wall-clock comparison of the scan/reduce kernels against sequential folds.

The ensemble workload is the final-time interaction unitary for ``K``
realisations of ``M`` steps. The scan/reduce path uses the binary-tree
reduction over all threads; the sequential path folds one step at a time on
a single thread. Both backends (compiled and numpy) are timed when present.
"""
import os
import time

import numpy as np

from . import _backend
from . import matcore as mc


def _best_of(fn, repeats):
    fn()  # warm-up
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _workload(m, k, seed):
    rng = np.random.default_rng(seed)
    # random control steps and noise samples of unit scale
    h = rng.normal(size=(m, 2, 2)) + 1j * rng.normal(size=(m, 2, 2))
    h = 0.5 * (h + mc.dagger(h))
    u = mc.prefix_scan_products(mc.expm_skew(h, 1.0 / m))
    nx = mc.bloch_vectors(u, mc.SIGMA_X)
    nz = mc.bloch_vectors(u, mc.SIGMA_Z)
    bx = rng.normal(size=(k, m))
    return h, nx, nz, bx, np.abs(bx)


def run_bench(num_steps=1024, realisations=2000, threads=0, repeats=3, backends=None, seed=0):
    """Time every kernel pair; returns ``(rows, summary)``.

    ``summary`` maps backend name to the sequential/scan-reduce time ratio
    for the ensemble workload.
    """
    threads = threads or os.cpu_count() or 1
    backends = backends or _backend.available()
    h, nx, nz, bx, bz = _workload(num_steps, realisations, seed)
    factors = mc.expm_skew(h, 1.0 / num_steps)
    dt = 1.0 / num_steps
    rows, summary = [], {}
    for name in backends:
        kern = _backend.load(name)
        t_tree = _best_of(lambda: kern.ensemble_quaternions(nx, nz, bx, bz, dt, threads), repeats)
        t_seq = _best_of(lambda: kern.ensemble_quaternions_sequential(nx, nz, bx, bz, dt, 1), repeats)
        t_scan = _best_of(lambda: kern.scan_products(factors), repeats)
        t_fold = _best_of(lambda: kern.sequential_products(factors), repeats)
        rows += [
            {"backend": name, "kernel": "ensemble", "path": "scan-reduce", "threads": threads, "seconds": t_tree},
            {"backend": name, "kernel": "ensemble", "path": "sequential", "threads": 1, "seconds": t_seq},
            {"backend": name, "kernel": "control", "path": "scan-reduce", "threads": 1, "seconds": t_scan},
            {"backend": name, "kernel": "control", "path": "sequential", "threads": 1, "seconds": t_fold},
        ]
        summary[name] = t_seq / t_tree
    meta = {
        "num_steps": num_steps,
        "realisations": realisations,
        "threads": threads,
        "cpu_count": os.cpu_count(),
        "speedup": summary,
    }
    return rows, meta


def format_table(rows, meta):
    lines = [f"{'backend':8} {'kernel':9} {'path':12} {'threads':>7} {'ms':>10}"]
    for r in rows:
        lines.append(
            f"{r['backend']:8} {r['kernel']:9} {r['path']:12} {r['threads']:>7} {1e3 * r['seconds']:>10.2f}"
        )
    for name, s in meta["speedup"].items():
        lines.append(f"speedup[{name}] sequential/scan-reduce = {s:.2f}x "
                     f"(M={meta['num_steps']}, K={meta['realisations']}, threads={meta['threads']}, "
                     f"cpus={meta['cpu_count']})")
    return "\n".join(lines)
