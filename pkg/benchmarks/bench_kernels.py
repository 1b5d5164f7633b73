"""Time the compiled and numpy kernel backends on representative circuits."""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from fermivqe import kernels
from fermivqe.circuits import build_ansatz
from fermivqe.lattice import build_geometry

CASES = [
    ("chain_1x12 fermionic L4", ("chain", 1, 12), False, "fermionic", 4),
    ("chain_1x12 qubit L6", ("chain", 1, 12), False, "qubit", 6),
    ("rectangle_3x4 qubit L6", ("rectangle", 3, 4), False, "qubit", 6),
    ("chain_1x6 spinful fermionic L5", ("chain", 1, 6), True, "fermionic", 5),
    ("ladder_2x3 spinful qubit L6", ("ladder", 2, 3), True, "qubit", 6),
]


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench(repeat: int) -> list[dict]:
    backends = kernels.available_backends()
    rows = []
    rng = np.random.default_rng(0)
    for label, shape, spinful, paradigm, layers in CASES:
        a = build_ansatz(build_geometry(*shape), paradigm, spinful=spinful, layers=layers)
        mats = a.blocks(rng.uniform(-1, 1, a.num_params))
        psi0 = rng.normal(size=1 << a.num_modes) + 0j
        psi0 /= np.linalg.norm(psi0)
        lam0 = rng.normal(size=psi0.size) + 0j
        row = {"case": label, "modes": a.num_modes, "gates": len(a.p)}
        for name, mod in backends.items():
            args = (a.num_modes, a.p, a.q, a.signed, mats)
            row[f"{name}_forward_ms"] = 1e3 * best_of(lambda: mod.apply_gates(psi0.copy(), *args), repeat)
            row[f"{name}_adjoint_ms"] = 1e3 * best_of(lambda: mod.adjoint_sums(psi0.copy(), lam0.copy(), *args), repeat)
        if "cython" in backends:
            row["speedup_forward"] = row["python_forward_ms"] / row["cython_forward_ms"]
            row["speedup_adjoint"] = row["python_adjoint_ms"] / row["cython_adjoint_ms"]
        rows.append(row)
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write the results to this file")
    args = ap.parse_args()
    rows = bench(args.repeat)
    names = list(kernels.available_backends())
    head = f"{'case':<32}{'gates':>6}" + "".join(f"{n + ' fwd':>14}{n + ' adj':>14}" for n in names)
    if "cython" in names:
        head += f"{'x fwd':>8}{'x adj':>8}"
    print(head)
    for r in rows:
        line = f"{r['case']:<32}{r['gates']:>6}" + "".join(f"{r[n + '_forward_ms']:>11.2f} ms{r[n + '_adjoint_ms']:>11.2f} ms" for n in names)
        if "cython" in names:
            line += f"{r['speedup_forward']:>8.1f}{r['speedup_adjoint']:>8.1f}"
        print(line)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
