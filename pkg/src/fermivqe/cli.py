from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import experiments as ex
from .kernels import BACKEND

log = logging.getLogger("fermivqe")

DEFAULT_KIND = {
    "ed": "ed",
    "staircase": "staircase",
    "vqe": "vqe",
    "resources": "resources",
    "jw-stats": "jw_stats",
    "table": "table_spinless",
    "scale": "scaling",
    "molecule": "molecule",
}


def _geometry(args) -> dict | None:
    if getattr(args, "geometry", None) is None:
        return None
    kind = args.geometry
    if kind == "custom":
        raise SystemExit("custom geometries are configured through --config")
    rows = args.rows if args.rows is not None else (2 if kind == "ladder" else 1)
    return {"kind": kind, "rows": rows, "cols": args.cols}


def _base_config(cmd: str, args) -> ex.ExperimentConfig:
    doc: dict = {}
    if args.config:
        doc = json.loads(Path(args.config).read_text())
    if cmd == "table" and not args.config:
        return ex.standard_table_config(args.spinful)
    if cmd == "resources" and not args.config and args.geometry is None:
        return ex.standard_table_config(args.spinful, kind="resources")
    if cmd == "molecule" and not args.config:
        return ex.molecule_config()
    doc.setdefault("kind", DEFAULT_KIND[cmd])
    return ex.ExperimentConfig.from_dict(doc)


def build_config(cmd: str, args) -> ex.ExperimentConfig:
    cfg = _base_config(cmd, args)
    d = {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}
    geo = _geometry(args)
    if geo is not None:
        d["geometry"] = geo
    for key in ("t", "U", "V", "mu", "n_particles", "hamiltonian"):
        val = getattr(args, key, None)
        if val is not None:
            d[key] = val
    if getattr(args, "spinful", False):
        d["spinful"] = True
    if getattr(args, "paradigm", None):
        d["paradigms"] = (args.paradigm,)
    if getattr(args, "layers", None):
        d["layers"] = {p: args.layers for p in ("fermionic", "qubit")}
    if getattr(args, "grid", None):
        d["grid"] = args.grid
    if getattr(args, "vary", None):
        d["vary"] = args.vary
    if getattr(args, "sizes", None):
        d["sizes"] = args.sizes
    if getattr(args, "max_layers", None):
        d["max_layers"] = args.max_layers
    if getattr(args, "scan_sectors", False):
        d["scan_sectors"] = True
    if args.out:
        d["out"] = args.out
    cfg = ex.ExperimentConfig(**d)
    return cfg.with_vqe(
        seed=args.seed,
        restarts=args.restarts,
        threads=args.threads,
        gradient_mode=getattr(args, "gradient", None),
        max_iterations=getattr(args, "max_iterations", None),
        reference=getattr(args, "reference", None),
    )


def _fmt_table(rows: list[ex.TableRow]) -> str:
    lines = [f"{'geometry':>14} {'paradigm':>9} {'L':>2} {'R_Q':>5} {'l_p':>5} {'depth':>5} {'l_I':>7} {'R_C':>9} {'F':>7}"]
    for r in rows:
        s = r.summary
        tail = "" if s is None else f" {s.mean_lI:7.1f} {s.R_C:9.0f} {s.mean_final_fidelity:7.4f}"
        lines.append(f"{r.geometry:>14} {r.paradigm:>9} {r.layers:>2} {r.R_Q:>5} {r.l_p:>5} {r.depth:>5}{tail}{'  ' + r.error if r.error else ''}")
    return "\n".join(lines)


def _summary_line(name: str, s) -> str:
    return (
        f"{name}: E0={s.E0_exact:.10f} Nf={s.Nf} R_Q={s.R_Q} l_p={s.l_p} depth={s.depth} "
        f"mean_lI={s.mean_lI:.2f} reach={s.reach_fraction:.2f} R_C={s.R_C:.0f} "
        f"E={s.mean_final_energy:.8f}+-{s.std_final_energy:.2e} F={s.mean_final_fidelity:.4f}+-{s.std_final_fidelity:.2e}"
    )


def run(cmd: str, cfg: ex.ExperimentConfig) -> None:
    if cmd == "ed":
        sol = ex.run_ed(cfg)
        print(f"E0={sol.energy:.12f} Nf={sol.n_particles} degeneracy={sol.degeneracy}")
    elif cmd == "staircase":
        for p in ex.run_staircase(cfg):
            print(f"{cfg.vary}={p.coupling:g} Nf={p.n_particles} E0={p.energy:.10f}")
    elif cmd == "jw-stats":
        doc = ex.run_jw_stats(cfg)
        print(f"{doc['model']}: {doc['term_count']} Pauli strings, max weight {doc['max_weight']}, histogram {doc['weight_histogram']}")
    elif cmd == "resources":
        print(_fmt_table(ex.run_table(cfg, resources_only=True)))
    elif cmd == "table":
        print(_fmt_table(ex.run_table(cfg)))
    elif cmd == "vqe":
        print(_summary_line(cfg.paradigms[0], ex.run_single_vqe(cfg).summary))
    elif cmd == "scale":
        points, fits = ex.run_scaling(cfg)
        for par, p in points:
            print(f"{par:>9} N={p.N:>3} L={p.layers} R_Q={p.R_Q} R_C={p.R_C} F={p.mean_final_fidelity}")
        for f in fits:
            print(f"{f.paradigm:>9} beta_{f.resource[-1]} = {f.exponent:.3f} +- {f.stderr:.3f}")
    elif cmd == "molecule":
        for par, res in ex.run_molecule(cfg).items():
            print(_summary_line(par, res.summary))
    print(f"outputs in {cfg.out}")


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment JSON file")
    common.add_argument("--seed", type=int)
    common.add_argument("--restarts", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, help="worker processes for restarts")
    common.add_argument("-v", "--verbose", action="store_true")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--geometry", choices=["chain", "ladder", "rectangle"])
    model.add_argument("--rows", type=int)
    model.add_argument("--cols", type=int, default=12)
    model.add_argument("--spinful", action="store_true")
    model.add_argument("--t", type=float)
    model.add_argument("--U", type=float)
    model.add_argument("--V", type=float)
    model.add_argument("--mu", type=float)

    opt = argparse.ArgumentParser(add_help=False)
    opt.add_argument("--gradient", choices=["finite_difference", "adjoint"])
    opt.add_argument("--max-iterations", type=int, dest="max_iterations")
    opt.add_argument("--reference", help="reference pattern: spread, paired, lowest")

    ap = argparse.ArgumentParser(prog="fermivqe", description="Fermionic vs qubit VQE resource comparison.")
    ap.add_argument("--version", action="version", version=f"%(prog)s (kernels: {BACKEND})")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("ed", parents=[common, model], help="exact ground state over all sectors")
    p.add_argument("--hamiltonian", help="molecular Hamiltonian JSON")
    p.add_argument("--n-particles", type=int, dest="n_particles")

    p = sub.add_parser("staircase", parents=[common, model], help="ground sector along a coupling grid")
    p.add_argument("--grid", type=float, nargs="+")
    p.add_argument("--vary", choices=["V", "U"])

    p = sub.add_parser("vqe", parents=[common, model, opt], help="one VQE cell with restarts")
    p.add_argument("--paradigm", choices=["fermionic", "qubit"])
    p.add_argument("--layers", type=int)
    p.add_argument("--n-particles", type=int, dest="n_particles")
    p.add_argument("--scan-sectors", action="store_true", dest="scan_sectors")

    p = sub.add_parser("resources", parents=[common, model], help="gate and parameter counts")
    p.add_argument("--paradigm", choices=["fermionic", "qubit"])
    p.add_argument("--layers", type=int)

    sub.add_parser("jw-stats", parents=[common, model], help="Pauli-string statistics of the JW image")

    p = sub.add_parser("table", parents=[common, opt], help="resource and convergence table")
    p.add_argument("--spinful", action="store_true", help="use the spinful table settings")

    p = sub.add_parser("scale", parents=[common, model, opt], help="scaling exponents over system sizes")
    p.add_argument("--sizes", type=int, nargs="+")
    p.add_argument("--max-layers", type=int, dest="max_layers")

    p = sub.add_parser("molecule", parents=[common, opt], help="both paradigms on a molecular Hamiltonian")
    p.add_argument("--hamiltonian", help="molecular Hamiltonian JSON (default: bundled water)")
    p.add_argument("--n-particles", type=int, dest="n_particles")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = build_config(args.cmd, args)
        log.info("running %s with kernels=%s", args.cmd, BACKEND)
        run(args.cmd, cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
