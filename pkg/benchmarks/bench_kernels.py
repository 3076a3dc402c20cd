"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--starts 5] [--repeat 3]

Both backends run the same inputs; the script also checks that they agree.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from idcert import _kernels_py
from idcert import states as st
from idcert.gamma import _row_actions, _start_point, class_from_label
from idcert.ids import IdTable
from idcert.stabilizer import state_stabilizer

try:
    from idcert import _kernels as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def id_search(k):
    group = state_stabilizer(st.make_named_state("ring_graph", 5))
    elems = sorted(group.nonidentity(), key=lambda e: e.letters)
    keys = [e.x | (e.z << 5) for e in elems]

    def run():
        subsets = k.xor_zero_subsets(keys, 5, 5)
        n_ent = 0
        for idx in subsets:
            xs = [elems[i].x for i in idx]
            zs = [elems[i].z for i in idx]
            if k.id_is_entangled(xs, zs, 5) and k.id_is_critical(xs, zs, 5):
                n_ent += 1
        return len(subsets), n_ent

    return run


def gamma_starts(k, starts):
    rows = IdTable(["ZZII", "ZIXX", "-IZYY", "YXXY", "YXYX"]).rows
    perms, coeffs = _row_actions(rows)
    seed = class_from_label("psi4 W123", 4).seed.data

    def run():
        best = 0.0
        for s in range(starts):
            x0 = _start_point(7, s, 12)
            _, f, _, _ = k.maximize_sum_abs(seed.real, seed.imag, perms, coeffs.real,
                                            coeffs.imag, 4, x0, 1e-7, 2000)
            best = max(best, f)
        return round(best, 6)

    return run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--starts", type=int, default=5, help="optimizer starts per backend")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if compiled is None:
        print("compiled extension not built; run `pip install -e .` first", file=sys.stderr)
        return 1
    cases = [
        ("ID search, 5-qubit ring, M=5", id_search),
        (f"gamma, {args.starts} Nelder-Mead starts", lambda k: gamma_starts(k, args.starts)),
    ]
    print(f"{'kernel':<34} {'python [s]':>11} {'cython [s]':>11} {'speedup':>8}  agree")
    for name, make in cases:
        tp, outp = best_of(make(_kernels_py), args.repeat)
        tc, outc = best_of(make(compiled), args.repeat)
        print(f"{name:<34} {tp:>11.4f} {tc:>11.4f} {tp / tc:>7.1f}x  {outp == outc}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
