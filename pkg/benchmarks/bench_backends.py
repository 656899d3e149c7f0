"""Time the hot paths under the numba and pure-numpy backends.

The backend is fixed at import time by HETLAB_BACKEND, so each backend runs
in its own subprocess.  Usage:

    python3 benchmarks/bench_backends.py [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from hetlab import BACKEND
from hetlab.cauchy import solve_cauchy
from hetlab.kernels import mixed, p_power
from hetlab.minimizer import action_gradient, discrete_action, initial_ramp
from hetlab.potentials import p_double_well, phi_double_well

repeat = int(sys.argv[1])

def best(fn):
    fn()  # warm-up (JIT compilation under numba)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)

k2, P2 = p_power(2), p_double_well(2, 1)
k3, P3 = p_power(3), p_double_well(3, 1)
km = mixed(2, 4)
Pm = phi_double_well(km, 1.0)
D = discrete_action(P2, T=12, N=4001)
u = initial_ramp(D)
out = {
    "backend": BACKEND,
    "cauchy p=2": best(lambda: solve_cauchy(k2, P2)),
    "cauchy p=3": best(lambda: solve_cauchy(k3, P3)),
    "cauchy mixed": best(lambda: solve_cauchy(km, Pm)),
    "action+gradient x100": best(lambda: [action_gradient(D, k2, P2, u) for _ in range(100)]),
}
print(json.dumps(out))
"""


def run(backend, repeat):
    env = dict(os.environ, HETLAB_BACKEND=backend)
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    nb, npy = run("numba", args.repeat), run("numpy", args.repeat)
    print(f"{'case':<24} {'numba [s]':>12} {'numpy [s]':>12} {'speedup':>9}")
    for key in nb:
        if key == "backend":
            continue
        print(f"{key:<24} {nb[key]:12.4f} {npy[key]:12.4f} {npy[key] / nb[key]:9.1f}")


if __name__ == "__main__":
    main()
