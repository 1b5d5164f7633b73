"""Regenerate the bundled water Hamiltonian (development only, needs pyscf).

STO-3G water near equilibrium, Hartree-Fock orbitals, the three lowest
orbitals frozen, and a 4-orbital / 4-electron active space. Spin orbitals are
interleaved: mode = 2 * orbital + spin. The CASCI energy is stored as an
independent check on the exact solver.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np
from pyscf import ao2mo, gto, mcscf, scf

N_ORB = 4
N_ELEC = 4


def build(bond: float = 0.9584, angle: float = 104.45) -> dict:
    half = np.deg2rad(angle) / 2
    mol = gto.M(
        atom=[
            ["O", (0.0, 0.0, 0.0)],
            ["H", (bond * np.sin(half), bond * np.cos(half), 0.0)],
            ["H", (-bond * np.sin(half), bond * np.cos(half), 0.0)],
        ],
        basis="sto-3g",
        unit="Angstrom",
        verbose=0,
    )
    mf = scf.RHF(mol).run()
    cas = mcscf.CASCI(mf, N_ORB, N_ELEC)
    e_cas = float(cas.kernel()[0])
    h1, e_core = cas.get_h1eff()
    eri = ao2mo.restore(1, cas.get_h2eff(), N_ORB)

    terms = [{"c": [float(e_core), 0.0], "ops": []}]
    for p in range(N_ORB):
        for q in range(N_ORB):
            if abs(h1[p, q]) < 1e-12:
                continue
            for s in (0, 1):
                terms.append({"c": [float(h1[p, q]), 0.0], "ops": [[2 * p + s, "+"], [2 * q + s, "-"]]})
    # 1/2 sum (pq|rs) a+_{p s} a+_{r t} a_{s' t} a_{q s}
    for p in range(N_ORB):
        for q in range(N_ORB):
            for r in range(N_ORB):
                for s in range(N_ORB):
                    v = 0.5 * eri[p, q, r, s]
                    if abs(v) < 1e-12:
                        continue
                    for a in (0, 1):
                        for b in (0, 1):
                            if 2 * p + a == 2 * r + b or 2 * q + a == 2 * s + b:
                                continue
                            ops = [[2 * p + a, "+"], [2 * r + b, "+"], [2 * s + b, "-"], [2 * q + a, "-"]]
                            terms.append({"c": [float(v), 0.0], "ops": ops})
    return {
        "name": "h2o_sto3g_cas4o4e",
        "num_modes": 2 * N_ORB,
        "terms": terms,
        "meta": {
            "basis": "sto-3g",
            "bond_angstrom": bond,
            "angle_deg": angle,
            "active_orbitals": N_ORB,
            "active_electrons": N_ELEC,
            "mode_order": "interleaved (2*orbital + spin)",
            "hf_energy": float(mf.e_tot),
            "casci_energy": e_cas,
        },
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "src/fermivqe/data/h2o_4o4e.json"))
    args = ap.parse_args()
    data = build()
    Path(args.out).write_text(json.dumps(data, indent=1) + "\n")
    print(f"wrote {len(data['terms'])} terms, CASCI {data['meta']['casci_energy']:.10f}")


if __name__ == "__main__":
    main()
