"""Second-quantized Hamiltonians, their action on Fock states, and the
Jordan-Wigner image as a sum of Pauli strings."""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .fock import num_modes_of
from .lattice import DOWN, UP, Geometry, RegisterMap, register_map

HERMITIAN_TOL = 1e-10


class HamiltonianError(ValueError):
    pass


@dataclass(frozen=True)
class FermionOp:
    mode: int
    dagger: bool

    def adjoint(self) -> FermionOp:
        return FermionOp(self.mode, not self.dagger)

    def __str__(self) -> str:
        return f"c{'+' if self.dagger else ''}{self.mode}"


@dataclass(frozen=True)
class FermionTerm:
    """``coefficient * ops[0] ops[1] ...``; the rightmost op acts first."""

    coefficient: complex
    ops: tuple[FermionOp, ...] = ()

    def adjoint(self) -> FermionTerm:
        return FermionTerm(complex(self.coefficient).conjugate(), tuple(op.adjoint() for op in reversed(self.ops)))

    @property
    def conserves_number(self) -> bool:
        return sum(1 if op.dagger else -1 for op in self.ops) == 0

    def __str__(self) -> str:
        body = " ".join(str(op) for op in self.ops) or "1"
        return f"({self.coefficient:.6g}) {body}"


def cre(mode: int) -> FermionOp:
    return FermionOp(mode, True)


def des(mode: int) -> FermionOp:
    return FermionOp(mode, False)


def hop(coef: complex, p: int, q: int) -> FermionTerm:
    return FermionTerm(coef, (cre(p), des(q)))


def number(coef: complex, p: int) -> FermionTerm:
    return FermionTerm(coef, (cre(p), des(p)))


def density_density(coef: complex, p: int, q: int) -> FermionTerm:
    return FermionTerm(coef, (cre(p), des(p), cre(q), des(q)))


def _term_action(term: FermionTerm, masks: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Apply the operator string of ``term`` to every basis mask at once.

    Returns (valid, new_masks, signs); invalid entries were annihilated.
    """
    out = masks.copy()
    valid = np.ones(masks.shape, dtype=bool)
    odd = np.zeros(masks.shape, dtype=np.uint8)
    for op in reversed(term.ops):
        bit = np.uint64(1) << np.uint64(op.mode)
        occupied = (out & bit) != 0
        valid &= ~occupied if op.dagger else occupied
        below = out & (bit - np.uint64(1))
        odd ^= (np.bitwise_count(below) & 1).astype(np.uint8)
        out = out ^ bit
    signs = np.where(odd == 1, -1.0, 1.0)
    return valid, out, signs


@dataclass(frozen=True)
class FermionHamiltonian:
    num_modes: int
    terms: tuple[FermionTerm, ...]
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self) -> None:
        for term in self.terms:
            for op in term.ops:
                if not 0 <= op.mode < self.num_modes:
                    raise HamiltonianError(f"mode {op.mode} outside [0, {self.num_modes}) in term {term}")

    @property
    def dim(self) -> int:
        return 1 << self.num_modes

    @property
    def conserves_number(self) -> bool:
        return all(t.conserves_number for t in self.terms)

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        """Sparse matrix in the occupation basis (cached)."""
        masks = np.arange(self.dim, dtype=np.uint64)
        rows, cols, vals = [], [], []
        for term in self.terms:
            valid, out, signs = _term_action(term, masks)
            cols.append(masks[valid].astype(np.int64))
            rows.append(out[valid].astype(np.int64))
            vals.append(complex(term.coefficient) * signs[valid])
        if rows:
            r, c, v = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
        else:
            r = c = np.zeros(0, dtype=np.int64)
            v = np.zeros(0, dtype=np.complex128)
        mat = sp.coo_matrix((v, (r, c)), shape=(self.dim, self.dim)).tocsr()
        mat.sum_duplicates()
        mat.eliminate_zeros()
        return mat

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def sector_matrix(self, n_particles: int) -> sp.csr_matrix:
        from .fock import sector_indices

        idx = sector_indices(self.num_modes, n_particles)
        return self.matrix[idx][:, idx].tocsr()

    def hermiticity_error(self) -> float:
        diff = self.matrix - self.matrix.conj().T
        return float(abs(diff).max()) if diff.nnz else 0.0

    def validate_hermitian(self) -> None:
        err = self.hermiticity_error()
        scale = max(1.0, float(abs(self.matrix).max()) if self.matrix.nnz else 1.0)
        if err > HERMITIAN_TOL * scale:
            raise HamiltonianError(f"Hamiltonian is not Hermitian (max |H - H^dagger| = {err:.3e})")


def apply(h: FermionHamiltonian, psi: np.ndarray) -> np.ndarray:
    """``H|psi>`` evaluated term by term with fermionic signs."""
    if num_modes_of(psi) != h.num_modes:
        raise ValueError(f"dimension mismatch: H has {h.num_modes} modes, state has {num_modes_of(psi)}")
    masks = np.arange(h.dim, dtype=np.uint64)
    out = np.zeros_like(psi, dtype=np.complex128)
    for term in h.terms:
        valid, new, signs = _term_action(term, masks)
        # a product of ladder operators is injective on the states it keeps
        out[new[valid].astype(np.int64)] += complex(term.coefficient) * signs[valid] * psi[valid]
    return out


def expectation(h: FermionHamiltonian, psi: np.ndarray) -> float:
    if psi.shape[0] != h.dim:
        raise ValueError(f"dimension mismatch: H acts on {h.dim} amplitudes, state has {psi.shape[0]}")
    val = np.vdot(psi, h.matrix @ psi)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise HamiltonianError(f"expectation value has imaginary part {val.imag:.3e}")
    return float(val.real)


# --- model builders -----------------------------------------------------------


def build_spinless_hubbard(
    geometry: Geometry,
    t: float = 1.0,
    V: float = 0.0,
    mu: float = 0.0,
    register: RegisterMap | None = None,
) -> FermionHamiltonian:
    reg = register or register_map(geometry, spinful=False)
    if reg.spinful:
        raise HamiltonianError("spinless model needs a spinless register map")
    terms: list[FermionTerm] = []
    for bond in geometry.bonds:
        a, b = reg.mode_of(bond.a), reg.mode_of(bond.b)
        if t:
            terms += [hop(-t, a, b), hop(-t, b, a)]
        if V:
            terms.append(density_density(V, a, b))
    if mu:
        terms += [number(-mu, reg.mode_of(s)) for s in range(geometry.num_sites)]
    name = f"spinless {geometry.label()} t={t:g} V={V:g} mu={mu:g}"
    return FermionHamiltonian(reg.num_modes, tuple(terms), name)


def build_spinful_hubbard(
    geometry: Geometry,
    t: float = 1.0,
    U: float = 0.0,
    V: float = 0.0,
    mu: float = 0.0,
    register: RegisterMap | None = None,
) -> FermionHamiltonian:
    reg = register or register_map(geometry, spinful=True)
    if not reg.spinful:
        raise HamiltonianError("spinful model needs a spinful register map")
    spins = (UP, DOWN)
    terms: list[FermionTerm] = []
    for bond in geometry.bonds:
        if t:
            for s in spins:
                a, b = reg.mode_of(bond.a, s), reg.mode_of(bond.b, s)
                terms += [hop(-t, a, b), hop(-t, b, a)]
        if V:
            for s in spins:
                for s2 in spins:
                    terms.append(density_density(V, reg.mode_of(bond.a, s), reg.mode_of(bond.b, s2)))
    for site in range(geometry.num_sites):
        if U:
            terms.append(density_density(U, reg.mode_of(site, UP), reg.mode_of(site, DOWN)))
        if mu:
            terms += [number(-mu, reg.mode_of(site, s)) for s in spins]
    name = f"spinful {geometry.label()} t={t:g} U={U:g} V={V:g} mu={mu:g}"
    return FermionHamiltonian(reg.num_modes, tuple(terms), name)


# --- molecular term-list files --------------------------------------------------

_DAGGER = {"+": True, "-": False, "−": False}


def load_molecular_hamiltonian(path: str | Path) -> FermionHamiltonian:
    """Read a JSON term list ``{"num_modes": M, "terms": [{"c": [re, im], "ops": [[mode, "+"|"-"], ...]}]}``.

    Terms with an empty ``ops`` list are constants. Hermiticity is checked on
    the assembled operator.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise HamiltonianError(f"cannot read Hamiltonian file {path}: {exc}") from exc
    return hamiltonian_from_dict(doc, name=path.stem)


def hamiltonian_from_dict(doc: dict, name: str = "") -> FermionHamiltonian:
    if not isinstance(doc, dict) or "num_modes" not in doc or "terms" not in doc:
        raise HamiltonianError("Hamiltonian file needs 'num_modes' and 'terms'")
    num_modes = doc["num_modes"]
    if not isinstance(num_modes, int) or num_modes < 1:
        raise HamiltonianError(f"bad num_modes {num_modes!r}")
    terms = []
    for k, raw in enumerate(doc["terms"]):
        try:
            c = raw["c"]
            coef = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
            ops = []
            for mode, kind in raw["ops"]:
                if kind not in _DAGGER or not isinstance(mode, int):
                    raise HamiltonianError(f"bad operator [{mode!r}, {kind!r}]")
                if not 0 <= mode < num_modes:
                    raise HamiltonianError(f"term {k}: mode {mode} outside [0, {num_modes})")
                ops.append(FermionOp(mode, _DAGGER[kind]))
        except HamiltonianError:
            raise
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise HamiltonianError(f"malformed term {k}: {raw!r}") from exc
        terms.append(FermionTerm(coef, tuple(ops)))
    h = FermionHamiltonian(num_modes, tuple(terms), doc.get("name", name), dict(doc.get("meta", {})))
    h.validate_hermitian()
    return h


def hamiltonian_to_dict(h: FermionHamiltonian) -> dict:
    return {
        "name": h.name,
        "num_modes": h.num_modes,
        "meta": h.meta,
        "terms": [
            {
                "c": [complex(t.coefficient).real, complex(t.coefficient).imag],
                "ops": [[op.mode, "+" if op.dagger else "-"] for op in t.ops],
            }
            for t in h.terms
        ],
    }


# --- Jordan-Wigner -----------------------------------------------------------------

# single-qubit products: (a, b) -> (phase, a*b)
_PAULI_PRODUCT = {
    ("X", "X"): (1, "I"), ("Y", "Y"): (1, "I"), ("Z", "Z"): (1, "I"),
    ("X", "Y"): (1j, "Z"), ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"), ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"), ("X", "Z"): (-1j, "Y"),
}

Factors = tuple[tuple[int, str], ...]


def _multiply(a: Factors, b: Factors) -> tuple[complex, Factors]:
    merged = dict(a)
    phase: complex = 1
    for q, letter in b:
        if q not in merged:
            merged[q] = letter
            continue
        ph, res = _PAULI_PRODUCT[(merged[q], letter)]
        phase *= ph
        if res == "I":
            del merged[q]
        else:
            merged[q] = res
    return phase, tuple(sorted(merged.items()))


@dataclass(frozen=True)
class PauliString:
    coefficient: float
    factors: Factors

    @property
    def weight(self) -> int:
        return len(self.factors)

    def label(self, num_qubits: int | None = None) -> str:
        if num_qubits is None:
            return " ".join(f"{p}{q}" for q, p in self.factors) or "I"
        chars = ["I"] * num_qubits
        for q, p in self.factors:
            chars[q] = p
        return "".join(chars)


@dataclass(frozen=True)
class PauliSum:
    num_qubits: int
    strings: tuple[PauliString, ...]

    def to_matrix(self) -> sp.csr_matrix:
        dim = 1 << self.num_qubits
        basis = np.arange(dim, dtype=np.int64)
        rows, cols, vals = [], [], []
        for s in self.strings:
            flip = sum(1 << q for q, p in s.factors if p in "XY")
            zlike = sum(1 << q for q, p in s.factors if p in "YZ")
            ny = sum(1 for _, p in s.factors if p == "Y")
            signs = np.where(np.bitwise_count(basis & zlike) & 1, -1.0, 1.0)
            rows.append(basis ^ flip)
            cols.append(basis)
            vals.append(s.coefficient * (1j**ny) * signs)
        if not rows:
            return sp.csr_matrix((dim, dim), dtype=np.complex128)
        return sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
        ).tocsr()


def _ladder_image(op: FermionOp, qubit: int) -> list[tuple[complex, Factors]]:
    # occupied <-> |1>, so c+ = Z-string (X - iY)/2 and c = Z-string (X + iY)/2
    tail = tuple((k, "Z") for k in range(qubit))
    y_phase = -0.5j if op.dagger else 0.5j
    return [(0.5, tail + ((qubit, "X"),)), (y_phase, tail + ((qubit, "Y"),))]


def jw_transform(h: FermionHamiltonian, order: Sequence[int] | None = None, tol: float = 1e-12) -> PauliSum:
    """Jordan-Wigner image of ``h``.

    ``order[m]`` is the qubit position of mode ``m`` (identity by default).
    """
    pos = list(order) if order is not None else list(range(h.num_modes))
    if sorted(pos) != list(range(h.num_modes)):
        raise HamiltonianError("JW order must be a permutation of the modes")
    acc: dict[Factors, complex] = defaultdict(complex)
    for term in h.terms:
        partial: dict[Factors, complex] = {(): complex(term.coefficient)}
        for op in term.ops:
            nxt: dict[Factors, complex] = defaultdict(complex)
            for factors, coef in partial.items():
                for c2, f2 in _ladder_image(op, pos[op.mode]):
                    phase, prod = _multiply(factors, f2)
                    nxt[prod] += coef * c2 * phase
            partial = nxt
        for factors, coef in partial.items():
            acc[factors] += coef
    strings = []
    for factors, coef in sorted(acc.items(), key=lambda kv: (len(kv[0]), kv[0])):
        if abs(coef) <= tol:
            continue
        if abs(coef.imag) > 1e-10:
            raise HamiltonianError(f"non-Hermitian input: Pauli coefficient {coef} is complex")
        strings.append(PauliString(float(coef.real), factors))
    return PauliSum(h.num_modes, tuple(strings))


@dataclass(frozen=True)
class PauliStats:
    term_count: int
    max_weight: int
    histogram: dict[int, int]


def pauli_stats(ps: PauliSum) -> PauliStats:
    hist = Counter(s.weight for s in ps.strings)
    return PauliStats(len(ps.strings), max(hist, default=0), dict(sorted(hist.items())))


def pauli_rows(ps: PauliSum) -> Iterable[tuple[int, int, float]]:
    for k, s in enumerate(ps.strings):
        yield k, s.weight, s.coefficient
