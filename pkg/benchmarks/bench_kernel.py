"""Compare the compiled and pure-numpy eigensolver backends.

Times batched cyclic-Jacobi sweeps on random Hermitian matrices at a few
(size, batch) shapes, checks that both backends agree to near machine
precision, and optionally times a full sandwich-verification workload in a
subprocess per backend (backend choice is fixed at import time).

Run from the repository root:

    python3 benchmarks/bench_kernel.py
    python3 benchmarks/bench_kernel.py --workload
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from cartanfinsler import _kernel_py
from cartanfinsler.numkernel import MAX_SWEEPS, OFFDIAG_RTOL

try:
    from cartanfinsler import _kernel
except ImportError:
    _kernel = None

SHAPES = [(2, 2000), (4, 2000), (8, 500), (16, 100)]

WORKLOAD = """
import time
import cartanfinsler.curvature as curv
import cartanfinsler.domains as dom
import cartanfinsler.metrics as met
import cartanfinsler.numkernel as nk
import cartanfinsler.schwarz as sw

metric = met.bergman_metric(dom.type_ii(3))
bounds = curv.curvature_bounds(metric, pair_draws=0)
t0 = time.perf_counter()
sw.verify_sandwich(metric, bounds.k1, bounds.k2, n_samples=2000, seed=1)
print(f"{nk.backend():>8s}  sandwich II(3) 2000 samples  "
      f"{time.perf_counter() - t0:7.3f} s")
"""


def random_hermitian(n, batch, rng):
    a = rng.standard_normal((batch, n, n)) + 1j * rng.standard_normal((batch, n, n))
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def time_backend(impl, ms, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        w, u, ok = impl.jacobi_eigh(ms, MAX_SWEEPS, OFFDIAG_RTOL, True)
        best = min(best, time.perf_counter() - t0)
    if not ok:
        raise RuntimeError("jacobi sweeps did not converge")
    return best, w


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repetitions per shape (best is kept)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workload", action="store_true",
                        help="also time an end-to-end verification run "
                             "under each backend (separate processes)")
    args = parser.parse_args(argv)

    if _kernel is None:
        print("compiled extension not importable; timing pure backend only")
    rng = np.random.default_rng(args.seed)

    header = f"{'shape':>12s} {'python':>10s} {'compiled':>10s} {'speedup':>8s} {'max |dw|':>10s}"
    print(header)
    print("-" * len(header))
    for n, batch in SHAPES:
        ms = random_hermitian(n, batch, rng)
        t_py, w_py = time_backend(_kernel_py, ms, args.repeats)
        if _kernel is None:
            print(f"{batch:>6d}x{n:<2d}{n:>3d} {t_py:>9.4f}s {'-':>10s} {'-':>8s} {'-':>10s}")
            continue
        t_c, w_c = time_backend(_kernel, ms, args.repeats)
        dw = np.max(np.abs(np.asarray(w_py) - np.asarray(w_c)))
        print(f"{f'{batch}x{n}x{n}':>12s} {t_py:>9.4f}s {t_c:>9.4f}s "
              f"{t_py / t_c:>7.1f}x {dw:>10.2e}")

    if args.workload:
        print(flush=True)
        for env_extra in ({"CARTANFINSLER_PURE": "1"}, {}):
            env = {k: v for k, v in os.environ.items()
                   if k != "CARTANFINSLER_PURE"}
            env.update(env_extra)
            subprocess.run([sys.executable, "-c", WORKLOAD], env=env,
                           check=True)


if __name__ == "__main__":
    main()
