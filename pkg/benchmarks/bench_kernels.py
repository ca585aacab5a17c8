"""Time the compiled kernels against the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.  Both kernel
modules are imported directly, so the environment switch is not needed.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from zetagof import _pykernels
from zetagof.distributions import RngStream, ZetaModel, sample_zeta, tally
from zetagof.stein import BETA_GRID, _delta

try:
    from zetagof import _ckernels
except ImportError:
    _ckernels = None


_STUDY = """
import time
from zetagof.montecarlo import SimulationConfig, warp_speed_study
cfg = SimulationConfig(n=100, replications=500, alternatives=("Zeta(2)", "Geom(3)"),
                       statistics=("stein:0", "stein:3", "cvm", "ksd", "ben"))
t0 = time.perf_counter()
warp_speed_study(cfg)
print(time.perf_counter() - t0)
"""


def _cases(n):
    x = sample_zeta(ZetaModel(2.0), n, RngStream(0, 0))
    v, c = tally(x)
    d = _delta(v.astype(float), 2.0)
    betas = np.array(BETA_GRID)
    return {
        "zeta3(s=2)": lambda k: k.zeta3(2.0, 1e-12, 1 << 20),
        "zeta3(s=1.05)": lambda k: k.zeta3(1.05, 1e-12, 1 << 20),
        f"stein_pair_sums(n={n}, 6 betas)": lambda k: k.stein_pair_sums(v, c, d, betas),
        f"ksd_pair_sum(n={n})": lambda k: k.ksd_pair_sum(v, c, 2.0, float(v.max()), 1.0),
    }


def _best(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=100, help="sample size for the pair sums")
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not built; run `python3 setup.py build_ext --inplace`")
        return
    print(f"{'kernel':<34}{'cython':>12}{'python':>12}{'speedup':>10}")
    for name, fn in _cases(args.n).items():
        tc = _best(lambda: fn(_ckernels), args.repeat)
        tp = _best(lambda: fn(_pykernels), args.repeat)
        print(f"{name:<34}{tc * 1e6:>10.2f}us{tp * 1e6:>10.2f}us{tp / tc:>9.1f}x")

    print("\nwarp-speed study, 2 x 500 replications, 5 statistics:")
    for label, env in (("cython", {}), ("python", {"ZETAGOF_PURE": "1"})):
        out = subprocess.run([sys.executable, "-c", _STUDY], env={**os.environ, **env},
                             capture_output=True, text=True, check=True)
        print(f"  {label:<8}{float(out.stdout):8.2f}s")


if __name__ == "__main__":
    main()
