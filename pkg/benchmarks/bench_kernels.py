"""Timing comparison of the accelerated kernels against the pure-numpy
fallback (CAPLAB_NO_NUMBA=1).

Each variant runs in a fresh subprocess so the environment flag is honored
at import time.  Usage: python3 benchmarks/bench_kernels.py
"""

import json
import os
import subprocess
import sys

BODY = r"""
import json, os, time
import numpy as np
from caplab import _kernels as kn
from caplab import constructions as cn

rng = np.random.default_rng(0)
results = {"numba": kn.USE_NUMBA}

# warm any jit compilation outside the timed region
kn.greedy_pack(rng.standard_normal((10, 3)), 0.5)
inst_w = cn.nonzero_init_instance(4, 0.25)
inst_w.witness_fn.eval(rng.standard_normal((4, inst_w.n)))

t = time.perf_counter()
cands = rng.standard_normal((20000, 4))
kn.greedy_pack(cands, 0.4)
results["greedy_pack_20k"] = time.perf_counter() - t

M = rng.standard_normal((120, 80))
A, V = M.copy(), np.eye(80)
t = time.perf_counter()
kn.jacobi_orthogonalize(A, V, 1e-12, 60)
results["jacobi_120x80"] = time.perf_counter() - t

inst = cn.nonzero_init_instance(10, 0.25)
Q = rng.standard_normal((2048, inst.n))
t = time.perf_counter()
inst.witness_fn.eval(Q)
results["encoded_eval_2048q_10240a"] = time.perf_counter() - t

t = time.perf_counter()
cn.verify_shattering(inst)
results["verify_m10"] = time.perf_counter() - t

print(json.dumps(results))
"""


def run(no_numba):
    env = dict(os.environ)
    env["CAPLAB_NO_NUMBA"] = "1" if no_numba else "0"
    proc = subprocess.run([sys.executable, "-c", BODY], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    fast = run(no_numba=False)
    slow = run(no_numba=True)
    print(f"{'kernel':36s} {'accelerated':>12s} {'numpy-only':>12s} {'speedup':>8s}")
    for key in fast:
        if key == "numba":
            continue
        f, s = fast[key], slow[key]
        print(f"{key:36s} {f:12.4f} {s:12.4f} {s / f:8.1f}x")
    if not fast["numba"]:
        print("note: numba unavailable; both columns ran the fallback")


if __name__ == "__main__":
    main()
