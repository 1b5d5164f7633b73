"""Campaigns: resource/convergence tables, staircases, scaling fits, molecules.

Every campaign writes CSV files plus a ``summary.json`` into its output
directory; reruns with the same configuration produce identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from scipy import stats

from .circuits import PARADIGMS, build_ansatz, count_resources
from .exactsolver import GroundSolution, global_ground, sector_solution, staircase
from .hamiltonian import (
    FermionHamiltonian,
    build_spinful_hubbard,
    build_spinless_hubbard,
    jw_transform,
    load_molecular_hamiltonian,
    pauli_rows,
    pauli_stats,
)
from .lattice import Geometry, build_geometry, geometry_from_dict, register_map
from .vqe import RunSummary, VqeConfig, VqeResult, run_vqe

EXPERIMENT_KINDS = ("table_spinless", "table_spinful", "staircase", "scaling", "molecule", "jw_stats", "resources", "ed", "vqe")


class ExperimentError(ValueError):
    pass


def bundled_molecule(name: str = "h2o_4o4e.json") -> Path:
    return Path(str(resources.files("fermivqe") / "data" / name))


@dataclass
class ExperimentConfig:
    kind: str
    geometry: dict = field(default_factory=lambda: {"kind": "chain", "rows": 1, "cols": 12})
    spinful: bool = False
    t: float = 1.0
    U: float = 0.0
    V: float = 0.0
    mu: float = 0.0
    paradigms: tuple[str, ...] = PARADIGMS
    layers: dict[str, int] = field(default_factory=lambda: {"fermionic": 1, "qubit": 1})
    cells: list[dict] | None = None
    vqe: VqeConfig = field(default_factory=VqeConfig)
    out: str = "results"
    hamiltonian: str | None = None
    n_particles: int | None = None
    scan_sectors: bool = False
    grid: list[float] = field(default_factory=list)
    vary: str = "V"
    sizes: list[int] = field(default_factory=list)
    max_layers: int = 10
    ordering: str = "row_major"

    def __post_init__(self) -> None:
        if self.kind not in EXPERIMENT_KINDS:
            raise ExperimentError(f"unknown experiment kind {self.kind!r}")
        if isinstance(self.vqe, dict):
            self.vqe = VqeConfig.from_dict(self.vqe)
        self.paradigms = tuple(self.paradigms)
        for p in self.paradigms:
            if p not in PARADIGMS:
                raise ExperimentError(f"unknown paradigm {p!r}")
        if any(int(v) < 1 for v in self.layers.values()) or self.max_layers < 1:
            raise ExperimentError("layer counts must be at least 1")
        if self.hamiltonian is not None and not Path(self.hamiltonian).is_file():
            raise ExperimentError(f"Hamiltonian file {self.hamiltonian} not found")

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ExperimentError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path: str | Path) -> ExperimentConfig:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def with_vqe(self, **kw) -> ExperimentConfig:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["vqe"] = self.vqe.replace(**{k: v for k, v in kw.items() if v is not None})
        return ExperimentConfig(**d)


# --- standard settings -----------------------------------------------------------------

SPINLESS_CELLS = [
    {"geometry": {"kind": "chain", "rows": 1, "cols": 12}, "layers": {"fermionic": 4, "qubit": 6}},
    {"geometry": {"kind": "ladder", "rows": 2, "cols": 6}, "layers": {"fermionic": 3, "qubit": 3}},
    {"geometry": {"kind": "rectangle", "rows": 3, "cols": 4}, "layers": {"fermionic": 3, "qubit": 6}},
]
SPINFUL_CELLS = [
    {"geometry": {"kind": "chain", "rows": 1, "cols": 6}, "layers": {"fermionic": 5, "qubit": 7}},
    {"geometry": {"kind": "ladder", "rows": 2, "cols": 3}, "layers": {"fermionic": 5, "qubit": 6}},
]


def standard_table_config(spinful: bool, **kw) -> ExperimentConfig:
    base: dict[str, Any] = dict(kind="table_spinful", spinful=True, U=2.5, V=0.5, cells=SPINFUL_CELLS)
    if not spinful:
        base = dict(kind="table_spinless", V=2.0, cells=SPINLESS_CELLS)
    base.update(kw)
    return ExperimentConfig(**base)


def water_geometry(num_orbitals: int) -> Geometry:
    """Orbitals as sites of an open chain."""
    return build_geometry("custom", bonds=[(k, k + 1) for k in range(num_orbitals - 1)], num_sites=num_orbitals)


# --- helpers ---------------------------------------------------------------------------


def build_model(cfg: ExperimentConfig, geometry: Geometry | None = None):
    geometry = geometry or geometry_from_dict(cfg.geometry)
    reg = register_map(geometry, spinful=cfg.spinful, ordering=cfg.ordering)
    if cfg.spinful:
        h = build_spinful_hubbard(geometry, t=cfg.t, U=cfg.U, V=cfg.V, mu=cfg.mu, register=reg)
    else:
        h = build_spinless_hubbard(geometry, t=cfg.t, V=cfg.V, mu=cfg.mu, register=reg)
    return geometry, reg, h


def _ground(h: FermionHamiltonian, n_particles: int | None) -> GroundSolution:
    return global_ground(h) if n_particles is None else sector_solution(h, n_particles)


def _clean(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def write_json(path: Path, obj: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def write_trace(path: Path, result: VqeResult) -> None:
    rows = (r for t in result.traces for r in t.rows())
    write_csv(path, ["restart", "iter", "energy", "fidelity"], rows)


def vqe_cell(
    h: FermionHamiltonian,
    geometry: Geometry,
    reg,
    paradigm: str,
    layers: int,
    ground: GroundSolution,
    config: VqeConfig,
) -> VqeResult:
    ansatz = build_ansatz(geometry, paradigm, spinful=reg.spinful, layers=layers, register=reg)
    return run_vqe(h, ansatz, ground, config, register=reg)


def scan_sectors(h, geometry, reg, paradigm, layers, config: VqeConfig) -> tuple[int, VqeResult]:
    """VQE in every particle-number sector; the lowest mean final energy wins.

    Fidelities are measured against each sector's own ground state.
    """
    best: tuple[int, VqeResult] | None = None
    for nf in range(1, h.num_modes):
        res = vqe_cell(h, geometry, reg, paradigm, layers, sector_solution(h, nf), config)
        if best is None or res.summary.mean_final_energy < best[1].summary.mean_final_energy:
            best = (nf, res)
    assert best is not None
    return best


# --- campaigns -------------------------------------------------------------------------

TABLE_HEADER = [
    "geometry", "paradigm", "spinful", "layers", "R_Q", "l_p", "depth", "mean_lI", "reach_fraction", "R_C",
    "mean_final_energy", "std_final_energy", "mean_final_fidelity", "std_final_fidelity", "E0_exact", "Nf", "error",
]


@dataclass
class TableRow:
    geometry: str
    paradigm: str
    spinful: bool
    layers: int
    R_Q: int
    l_p: int
    depth: int
    summary: RunSummary | None = None
    error: str = ""

    def csv_row(self) -> list:
        s = self.summary
        vals = [None] * 9 if s is None else [
            s.mean_lI, s.reach_fraction, s.R_C, s.mean_final_energy, s.std_final_energy,
            s.mean_final_fidelity, s.std_final_fidelity, s.E0_exact, s.Nf,
        ]
        return [self.geometry, self.paradigm, self.spinful, self.layers, self.R_Q, self.l_p, self.depth, *vals, self.error]


def _cells(cfg: ExperimentConfig) -> list[dict]:
    return cfg.cells if cfg.cells is not None else [{"geometry": cfg.geometry, "layers": cfg.layers}]


def run_table(cfg: ExperimentConfig, resources_only: bool = False, write: bool = True) -> list[TableRow]:
    """Resource counts and, unless ``resources_only``, VQE convergence per cell.

    A failing cell is reported with its error instead of aborting the table.
    """
    rows: list[TableRow] = []
    out = Path(cfg.out)
    for cell in _cells(cfg):
        geometry, reg, h = build_model(cfg, geometry_from_dict(cell["geometry"]))
        ground = None if resources_only else _ground(h, cfg.n_particles)
        for paradigm in cfg.paradigms:
            layers = int(cell["layers"][paradigm])
            ansatz = build_ansatz(geometry, paradigm, spinful=cfg.spinful, layers=layers, register=reg)
            res = count_resources(ansatz)
            row = TableRow(geometry.label(), paradigm, cfg.spinful, layers, res.R_Q, res.l_p, res.depth)
            if not resources_only:
                try:
                    result = run_vqe(h, ansatz, ground, cfg.vqe, register=reg)
                except Exception as exc:  # keep the rest of the table
                    row.error = f"{type(exc).__name__}: {exc}"
                else:
                    row.summary = result.summary
                    if write:
                        write_trace(out / f"trace_{geometry.label()}_{paradigm}_L{layers}.csv", result)
            rows.append(row)
    if write:
        write_csv(out / "table.csv", TABLE_HEADER, (r.csv_row() for r in rows))
        write_json(out / "summary.json", {
            "kind": cfg.kind,
            "cells": [{**{k: getattr(r, k) for k in ("geometry", "paradigm", "spinful", "layers", "R_Q", "l_p", "depth", "error")},
                       "summary": r.summary.as_dict() if r.summary else None} for r in rows],
        })
    return rows


@dataclass(frozen=True)
class ScalingPoint:
    N: int
    layers: int | None
    R_Q: int | None
    R_C: float | None
    mean_lI: float | None
    mean_final_fidelity: float | None
    converged: bool


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    stderr: float
    points: tuple[tuple[float, float], ...]
    resource: str
    paradigm: str = ""


def loglog_fit(points: Sequence[tuple[float, float]], resource: str = "R_Q", paradigm: str = "") -> ScalingFit:
    """Ordinary least squares slope of log R against log N."""
    pts = [(float(n), float(r)) for n, r in points]
    if len(pts) < 3:
        raise ExperimentError("a scaling fit needs at least 3 points")
    if any(n <= 0 or r <= 0 for n, r in pts):
        raise ExperimentError("scaling points must be strictly positive")
    x = np.log([n for n, _ in pts])
    y = np.log([r for _, r in pts])
    if np.ptp(x) == 0:
        raise ExperimentError("scaling points need at least two distinct sizes")
    fit = stats.linregress(x, y)
    return ScalingFit(float(fit.slope), float(fit.stderr), tuple(pts), resource, paradigm)


def scaling_geometry(cfg: ExperimentConfig, n: int) -> Geometry:
    kind = cfg.geometry.get("kind", "chain")
    rows = int(cfg.geometry.get("rows", 1))
    if kind == "chain":
        return build_geometry("chain", 1, n)
    if n % rows:
        raise ExperimentError(f"size {n} is not a multiple of {rows} rows")
    return build_geometry(kind, rows, n // rows)


def converged_layers(h, geometry, reg, paradigm, ground, cfg: ExperimentConfig) -> tuple[ScalingPoint, VqeResult | None]:
    """Smallest L (up to ``max_layers``) whose mean final fidelity reaches the threshold."""
    for layers in range(1, cfg.max_layers + 1):
        result = vqe_cell(h, geometry, reg, paradigm, layers, ground, cfg.vqe)
        s = result.summary
        if s.mean_final_fidelity >= cfg.vqe.fidelity_threshold:
            return ScalingPoint(geometry.num_sites, layers, s.R_Q, s.R_C, s.mean_lI, s.mean_final_fidelity, True), result
    return ScalingPoint(geometry.num_sites, None, None, None, None, s.mean_final_fidelity, False), None


def run_scaling(cfg: ExperimentConfig, write: bool = True) -> tuple[list[tuple[str, ScalingPoint]], list[ScalingFit]]:
    if len(cfg.sizes) < 3:
        raise ExperimentError("a scaling sweep needs at least 3 sizes")
    points: list[tuple[str, ScalingPoint]] = []
    for n in cfg.sizes:
        geometry, reg, h = build_model(cfg, scaling_geometry(cfg, n))
        ground = _ground(h, None)
        for paradigm in cfg.paradigms:
            pt, _ = converged_layers(h, geometry, reg, paradigm, ground, cfg)
            points.append((paradigm, pt))
    fits = []
    for paradigm in cfg.paradigms:
        good = [p for par, p in points if par == paradigm and p.converged]
        for kind in ("R_Q", "R_C"):
            pts = [(p.N, getattr(p, kind)) for p in good]
            if len(pts) >= 3 and all(v > 0 for _, v in pts):
                fits.append(loglog_fit(pts, kind, paradigm))
    if write:
        out = Path(cfg.out)
        write_csv(
            out / "scaling.csv",
            ["paradigm", "N", "layers", "R_Q", "R_C", "mean_lI", "mean_final_fidelity", "converged"],
            ((par, p.N, p.layers, p.R_Q, p.R_C, p.mean_lI, p.mean_final_fidelity, p.converged) for par, p in points),
        )
        write_json(out / "summary.json", {
            "kind": "scaling",
            "fits": [asdict(f) for f in fits],
            "points": [{"paradigm": par, **asdict(p)} for par, p in points],
        })
    return points, fits


MOLECULE_LAYERS = {"fermionic": 4, "qubit": 4}


def run_molecule(cfg: ExperimentConfig, write: bool = True) -> dict[str, VqeResult]:
    """Both paradigms on a loaded molecular Hamiltonian, orbitals on an open chain."""
    path = Path(cfg.hamiltonian) if cfg.hamiltonian else bundled_molecule()
    h = load_molecular_hamiltonian(path)
    if h.num_modes % 2:
        raise ExperimentError("molecular Hamiltonians need an even number of spin orbitals")
    geometry = water_geometry(h.num_modes // 2)
    reg = register_map(geometry, spinful=True)
    n_particles = cfg.n_particles
    if n_particles is None and not cfg.scan_sectors:
        n_particles = h.meta.get("active_electrons")
    ground = _ground(h, n_particles)
    out: dict[str, VqeResult] = {}
    for paradigm in cfg.paradigms:
        layers = int(cfg.layers.get(paradigm, MOLECULE_LAYERS[paradigm]))
        out[paradigm] = vqe_cell(h, geometry, reg, paradigm, layers, ground, cfg.vqe)
        if write:
            write_trace(Path(cfg.out) / f"trace_{paradigm}.csv", out[paradigm])
    if write:
        write_json(Path(cfg.out) / "summary.json", {
            "kind": "molecule",
            "hamiltonian": h.name,
            "E0_exact": ground.energy,
            "Nf": ground.n_particles,
            "reference": cfg.vqe.reference,
            "paradigms": {p: r.summary.as_dict() for p, r in out.items()},
        })
    return out


def molecule_config(**kw) -> ExperimentConfig:
    base: dict[str, Any] = dict(kind="molecule", spinful=True, layers=dict(MOLECULE_LAYERS), vqe=VqeConfig(reference="paired"))
    base.update(kw)
    return ExperimentConfig(**base)


def run_staircase(cfg: ExperimentConfig, write: bool = True):
    geometry = geometry_from_dict(cfg.geometry)
    pts = staircase(geometry, cfg.grid, spinful=cfg.spinful, vary=cfg.vary, t=cfg.t, U=cfg.U, V=cfg.V, mu=cfg.mu)
    if write:
        write_csv(Path(cfg.out) / "staircase.csv", [cfg.vary, "energy", "n_particles"], ((p.coupling, p.energy, p.n_particles) for p in pts))
    return pts


def run_jw_stats(cfg: ExperimentConfig, write: bool = True) -> dict:
    _, _, h = build_model(cfg)
    ps = jw_transform(h)
    st = pauli_stats(ps)
    doc = {"model": h.name, "num_qubits": h.num_modes, "term_count": st.term_count, "max_weight": st.max_weight, "weight_histogram": st.histogram}
    if write:
        write_json(Path(cfg.out) / "summary.json", doc)
        write_csv(Path(cfg.out) / "jw_stats.csv", ["term_index", "weight", "coefficient"], pauli_rows(ps))
    return doc


def run_ed(cfg: ExperimentConfig, write: bool = True) -> GroundSolution:
    if cfg.hamiltonian:
        h = load_molecular_hamiltonian(cfg.hamiltonian)
    else:
        _, _, h = build_model(cfg)
    sol = _ground(h, cfg.n_particles)
    if write:
        write_json(Path(cfg.out) / "summary.json", {
            "model": h.name,
            "E0_exact": sol.energy,
            "Nf": sol.n_particles,
            "degeneracy": sol.degeneracy,
            "tied_sectors": list(sol.tied_sectors),
            "sector_energies": {str(k): v for k, v in sorted(sol.sector_energies.items())},
        })
    return sol


def run_single_vqe(cfg: ExperimentConfig, write: bool = True) -> VqeResult:
    """One (geometry, paradigm, L) cell: summary.json plus trace.csv."""
    geometry, reg, h = build_model(cfg)
    if len(cfg.paradigms) != 1:
        raise ExperimentError("the vqe experiment takes exactly one paradigm")
    paradigm = cfg.paradigms[0]
    layers = int(cfg.layers[paradigm])
    if cfg.scan_sectors:
        nf, result = scan_sectors(h, geometry, reg, paradigm, layers, cfg.vqe)
    else:
        result = vqe_cell(h, geometry, reg, paradigm, layers, _ground(h, cfg.n_particles), cfg.vqe)
    if write:
        out = Path(cfg.out)
        write_json(out / "summary.json", {"geometry": geometry.label(), "paradigm": paradigm, "layers": layers, **result.summary.as_dict()})
        write_trace(out / "trace.csv", result)
    return result
