"""Compare the numba and numpy kernel backends.

Part 1 times each kernel variant directly (numba compile time excluded).
Part 2 times an end-to-end l1/l2 solve in fresh interpreters with
``RATIO_CS_NUMBA=1`` and ``RATIO_CS_NUMBA=0``.

    python benchmarks/bench_kernels.py [--repeat 5] [--skip-solve]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from ratio_cs import _kernels as K
from ratio_cs import numerics as nx

SOLVE_SNIPPET = """
import time
from ratio_cs import harness as hs, solvers as sv, _kernels
inst = hs.trial_instance(hs.ExperimentSpec(), 0, 12, 0)
sv.solve_l1l2(inst)  # warm up (numba compilation, caches)
t = time.perf_counter()
for _ in range({reps}):
    sv.solve_l1l2(inst)
print(_kernels.BACKEND, (time.perf_counter() - t) / {reps})
"""


def kernel_cases(rng):
    m, n = 50, 250
    A = nx.gaussian_matrix(rng, m, n)
    Q = np.ascontiguousarray(nx.qr_transpose(A).factors[0])
    y = rng.standard_normal(m)
    c = 0.1 * rng.standard_normal(n)
    xp = rng.standard_normal(n)
    w = np.ones(n)

    def admm(fn):
        return lambda: fn(Q, y, c, xp, w, 0.5, 20.0, 10.0, 1e-7, 1e-7, 500,
                          np.zeros(n), np.zeros(n))

    H = rng.standard_normal((20_000, 10))
    xg = rng.standard_normal(8)
    N = np.ascontiguousarray(rng.standard_normal((8, 2)))
    t = np.linspace(-5, 5, 401)
    return {
        "admm_loop (50x250, 500 it)": (admm(K.admm_loop_numpy), admm(getattr(K, "admm_loop_numba", None))),
        "nsp_margins (20000x10)": (lambda: K.nsp_margins_numpy(H, 3, 1.0, 1.0),
                                   lambda: K.nsp_margins_numba(H, 3, 1.0, 1.0)),
        "ratio_grid_min (401^2, n=8)": (lambda: K.ratio_grid_min_numpy(xg, N, t, t),
                                        lambda: K.ratio_grid_min_numba(xg, N, t, t)),
    }


def best_of(fn, repeat):
    fn()  # compile / warm up
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--skip-solve", action="store_true")
    a = p.parse_args(argv)

    if K.nb is None:
        print("numba is not importable; only the numpy backend exists")
        return 1
    print(f"{'kernel':32s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name, (f_np, f_nb) in kernel_cases(np.random.default_rng(0)).items():
        t_np, t_nb = best_of(f_np, a.repeat), best_of(f_nb, a.repeat)
        print(f"{name:32s} {1e3 * t_np:10.2f} {1e3 * t_nb:10.2f} {t_np / t_nb:8.1f}x")

    if not a.skip_solve:
        print("\nend-to-end solve_l1l2 (m=50, n=250, s=12)")
        for flag in ("1", "0"):
            env = dict(os.environ, RATIO_CS_NUMBA=flag)
            out = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET.format(reps=a.repeat)],
                                 env=env, capture_output=True, text=True, check=True).stdout
            backend, sec = out.split()
            print(f"  RATIO_CS_NUMBA={flag} ({backend}): {1e3 * float(sec):.1f} ms per solve")
    return 0


if __name__ == "__main__":
    sys.exit(main())
