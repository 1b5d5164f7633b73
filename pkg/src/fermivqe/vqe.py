"""The variational loop: energy, gradients, BFGS, and restart statistics."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .circuits import Ansatz, count_resources
from .exactsolver import GroundSolution, fidelity
from .fock import particle_numbers, popcount, reference_mask, reference_state
from .hamiltonian import FermionHamiltonian

GRADIENT_MODES = ("finite_difference", "adjoint")


class VqeError(ValueError):
    pass


@dataclass(frozen=True)
class VqeConfig:
    max_iterations: int = 150
    restarts: int = 100
    init_scale: float = 0.01
    seed: int = 0
    fd_step: float = 1e-5
    grad_tolerance: float = 1e-8
    fidelity_threshold: float = 0.95
    gradient_mode: str = "finite_difference"
    c1: float = 1e-4
    c2: float = 0.9
    threads: int = 1
    reference: str | int | tuple[int, ...] = "spread"

    def __post_init__(self) -> None:
        if not self.init_scale > 0:
            raise VqeError("init_scale must be positive")
        if not 0 < self.fidelity_threshold <= 1:
            raise VqeError("fidelity_threshold must lie in (0, 1]")
        if self.gradient_mode not in GRADIENT_MODES:
            raise VqeError(f"gradient_mode must be one of {GRADIENT_MODES}")
        if self.restarts < 1:
            raise VqeError("need at least one restart")
        if self.max_iterations < 0:
            raise VqeError("max_iterations must be non-negative")

    @classmethod
    def from_dict(cls, d: dict) -> VqeConfig:
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        if isinstance(known.get("reference"), list):
            known["reference"] = tuple(known["reference"])
        return cls(**known)

    def replace(self, **kw) -> VqeConfig:
        return VqeConfig(**{**asdict(self), **kw})


# --- cost function ------------------------------------------------------------------


def energy_of(params, ansatz: Ansatz, h: FermionHamiltonian, reference: np.ndarray) -> float:
    from .circuits import apply_ansatz

    psi = apply_ansatz(ansatz, params, reference)
    return float(np.vdot(psi, h.matrix @ psi).real)


class Objective:
    """Energy, gradient and state of one (ansatz, Hamiltonian, reference) triple.

    Keeps the last evaluated point so the optimizer's bookkeeping (fidelity of
    accepted iterates) does not re-run the circuit.
    """

    def __init__(self, ansatz: Ansatz, h: FermionHamiltonian, reference: np.ndarray, fd_step: float = 1e-5):
        if h.num_modes != ansatz.num_modes:
            raise VqeError("Hamiltonian and ansatz act on different registers")
        self.ansatz = ansatz
        self.h = h
        self.hmat = h.matrix
        self.reference = np.ascontiguousarray(reference, dtype=np.complex128)
        self.fd_step = fd_step
        self.nfev = 0
        self.ngev = 0
        self._last: tuple[bytes, np.ndarray, float] | None = None

    def state(self, params: np.ndarray) -> np.ndarray:
        key = np.asarray(params, dtype=float).tobytes()
        if self._last is not None and self._last[0] == key:
            return self._last[1]
        mats = self.ansatz.blocks(params)
        psi = self.reference.copy()
        kernels.apply_gates(psi, self.ansatz.num_modes, self.ansatz.p, self.ansatz.q, self.ansatz.signed, mats)
        return psi

    def energy(self, params: np.ndarray) -> float:
        self.nfev += 1
        psi = self.state(params)
        e = float(np.vdot(psi, self.hmat @ psi).real)
        self._last = (np.asarray(params, dtype=float).tobytes(), psi, e)
        return e

    def adjoint(self, params: np.ndarray) -> tuple[float, np.ndarray]:
        """Energy and exact gradient from one forward and one reverse sweep."""
        params = self.ansatz.check_params(params)
        self.nfev += 1
        self.ngev += 1
        a = self.ansatz
        mats = a.blocks(params)
        psi = self.reference.copy()
        kernels.apply_gates(psi, a.num_modes, a.p, a.q, a.signed, mats)
        lam = self.hmat @ psi
        e = float(np.vdot(psi, lam).real)
        self._last = (params.tobytes(), psi.copy(), e)
        sums = kernels.adjoint_sums(psi, lam, a.num_modes, a.p, a.q, a.signed, mats)
        dmats, owner = a.derivative_blocks(params)
        grad = 2.0 * np.einsum("kj,kj->k", dmats, sums[owner]).real
        return e, grad

    def finite_difference(self, params: np.ndarray) -> tuple[float, np.ndarray]:
        params = self.ansatz.check_params(params)
        self.ngev += 1
        h = self.fd_step
        grad = np.empty_like(params)
        x = params.copy()
        for k in range(params.size):
            x[k] = params[k] + h
            fp = self.energy(x)
            x[k] = params[k] - h
            fm = self.energy(x)
            x[k] = params[k]
            grad[k] = (fp - fm) / (2 * h)
        return self.energy(params), grad

    def value_and_grad(self, params: np.ndarray, mode: str) -> tuple[float, np.ndarray]:
        if mode == "adjoint":
            return self.adjoint(params)
        return self.finite_difference(params)


def gradient(params, ansatz: Ansatz, h: FermionHamiltonian, reference: np.ndarray, mode: str = "finite_difference", fd_step: float = 1e-5) -> np.ndarray:
    if mode not in GRADIENT_MODES:
        raise VqeError(f"unknown gradient mode {mode!r}")
    return Objective(ansatz, h, reference, fd_step).value_and_grad(params, mode)[1]


# --- BFGS with a strong Wolfe line search -----------------------------------------------


class LineSearchFailure(RuntimeError):
    pass


def _cubic_min(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi) -> float | None:
    d1 = d_lo + d_hi - 3 * (f_lo - f_hi) / (a_lo - a_hi)
    rad = d1 * d1 - d_lo * d_hi
    if not np.isfinite(rad) or rad < 0:
        return None
    d2 = math.copysign(math.sqrt(rad), a_hi - a_lo)
    denom = d_hi - d_lo + 2 * d2
    if denom == 0:
        return None
    a = a_hi - (a_hi - a_lo) * (d_hi + d2 - d1) / denom
    return a if np.isfinite(a) else None


def strong_wolfe(
    phi: Callable[[float], tuple[float, float]],
    f0: float,
    d0: float,
    alpha1: float,
    c1: float = 1e-4,
    c2: float = 0.9,
    alpha_max: float = 1e3,
    max_evals: int = 40,
) -> tuple[float, float]:
    """Step length satisfying the strong Wolfe conditions along a descent ray.

    ``phi(a)`` returns (f, directional derivative) at step ``a``. Returns
    (alpha, f(alpha)); raises LineSearchFailure when no such step is found.
    """
    if d0 >= 0:
        raise LineSearchFailure("search direction is not a descent direction")
    evals = 0

    def zoom(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi):
        nonlocal evals
        while evals < max_evals:
            width = a_hi - a_lo
            if abs(width) < 1e-14 * max(1.0, abs(a_lo)):
                break
            a = _cubic_min(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi)
            lo_b, hi_b = sorted((a_lo + 0.1 * width, a_hi - 0.1 * width))
            if a is None or not lo_b <= a <= hi_b:
                a = a_lo + 0.5 * width
            f, d = phi(a)
            evals += 1
            if f > f0 + c1 * a * d0 or f >= f_lo:
                a_hi, f_hi, d_hi = a, f, d
            else:
                if abs(d) <= -c2 * d0:
                    return a, f
                if d * (a_hi - a_lo) >= 0:
                    a_hi, f_hi, d_hi = a_lo, f_lo, d_lo
                a_lo, f_lo, d_lo = a, f, d
        raise LineSearchFailure("zoom phase did not find a strong Wolfe step")

    a_prev, f_prev, d_prev = 0.0, f0, d0
    a = alpha1
    while evals < max_evals:
        f, d = phi(a)
        evals += 1
        if not np.isfinite(f):
            a = 0.5 * (a_prev + a)
            continue
        if f > f0 + c1 * a * d0 or (evals > 1 and f >= f_prev):
            return zoom(a_prev, f_prev, d_prev, a, f, d)
        if abs(d) <= -c2 * d0:
            return a, f
        if d >= 0:
            return zoom(a, f, d, a_prev, f_prev, d_prev)
        a_prev, f_prev, d_prev = a, f, d
        if a >= alpha_max:
            break
        a = min(2 * a, alpha_max)
    raise LineSearchFailure("bracketing phase exhausted its evaluation budget")


@dataclass
class BfgsResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    iterations: int
    status: str
    nfev: int


def bfgs_minimize(
    fun_and_grad: Callable[[np.ndarray], tuple[float, np.ndarray]],
    x0: np.ndarray,
    max_iterations: int = 150,
    grad_tolerance: float = 1e-8,
    c1: float = 1e-4,
    c2: float = 0.9,
    callback: Callable[[int, np.ndarray, float], None] | None = None,
) -> BfgsResult:
    """Minimize with BFGS (inverse-Hessian form, identity start).

    One iteration is one accepted step; ``callback(k, x, f)`` runs for the
    start point (k = 0) and after every accepted step.
    """
    x = np.array(x0, dtype=float, copy=True)
    n = x.size
    f, g = fun_and_grad(x)
    nfev = 1
    hinv = np.eye(n)
    f_old = f + np.linalg.norm(g) / 2
    if callback:
        callback(0, x, f)
    status = "max_iterations"
    k = 0
    while k < max_iterations:
        if np.max(np.abs(g)) <= grad_tolerance:
            status = "converged"
            break
        p = -hinv @ g
        d0 = float(g @ p)
        if d0 >= 0:
            # lost positive definiteness; restart from steepest descent
            hinv = np.eye(n)
            p = -g
            d0 = float(g @ p)
        alpha1 = 1.0
        if d0 != 0:
            guess = 1.01 * 2 * (f - f_old) / d0
            if np.isfinite(guess) and guess > 0:
                alpha1 = min(1.0, guess)
        cache: dict[float, tuple[float, np.ndarray]] = {}

        def phi(a: float) -> tuple[float, float]:
            nonlocal nfev
            fa, ga = fun_and_grad(x + a * p)
            nfev += 1
            cache[a] = (fa, ga)
            return fa, float(ga @ p)

        try:
            alpha, f_new = strong_wolfe(phi, f, d0, alpha1, c1, c2)
        except LineSearchFailure:
            status = "line_search_failed"
            break
        g_new = cache[alpha][1]
        s = alpha * p
        y = g_new - g
        x = x + s
        f_old, f, g = f, f_new, g_new
        k += 1
        ys = float(y @ s)
        if ys > 1e-300:
            rho = 1.0 / ys
            hy = hinv @ y
            hinv = hinv + ((ys + y @ hy) * rho * rho) * np.outer(s, s) - rho * (np.outer(hy, s) + np.outer(s, hy))
        if callback:
            callback(k, x, f)
    else:
        if np.max(np.abs(g)) <= grad_tolerance:
            status = "converged"
    return BfgsResult(x, f, g, k, status, nfev)


# --- single runs and restart campaigns ---------------------------------------------------


@dataclass
class RunTrace:
    restart: int
    iterations: list[int] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)
    fidelities: list[float] = field(default_factory=list)
    final_params: np.ndarray | None = None
    iterations_to_threshold: int | None = None
    status: str = ""
    nfev: int = 0
    max_leak: float = 0.0

    @property
    def final_energy(self) -> float:
        return self.energies[-1]

    @property
    def final_fidelity(self) -> float:
        return self.fidelities[-1]

    def rows(self) -> list[tuple[int, int, float, float]]:
        return [(self.restart, i, e, f) for i, e, f in zip(self.iterations, self.energies, self.fidelities)]


def initial_params(n: int, config: VqeConfig, restart: int) -> np.ndarray:
    # one independent stream per restart, derived by counter
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, restart]))
    return rng.uniform(-config.init_scale, config.init_scale, size=n)


def run_single(
    ansatz: Ansatz,
    h: FermionHamiltonian,
    ground: GroundSolution,
    reference: np.ndarray,
    config: VqeConfig,
    restart: int = 0,
    x0: np.ndarray | None = None,
) -> RunTrace:
    obj = Objective(ansatz, h, reference, config.fd_step)
    n_particles = popcount(int(np.flatnonzero(np.abs(reference) > 0)[0]))
    outside = particle_numbers(ansatz.num_modes) != n_particles
    trace = RunTrace(restart)

    def record(k: int, x: np.ndarray, f: float) -> None:
        psi = obj.state(x)
        fid = fidelity(psi, ground)
        trace.iterations.append(k)
        trace.energies.append(f)
        trace.fidelities.append(fid)
        trace.max_leak = max(trace.max_leak, float(np.linalg.norm(psi[outside])))
        if trace.iterations_to_threshold is None and fid >= config.fidelity_threshold:
            trace.iterations_to_threshold = k

    x0 = initial_params(ansatz.num_params, config, restart) if x0 is None else np.asarray(x0, dtype=float)
    res = bfgs_minimize(
        lambda x: obj.value_and_grad(x, config.gradient_mode),
        x0,
        config.max_iterations,
        config.grad_tolerance,
        config.c1,
        config.c2,
        record,
    )
    trace.final_params = res.x
    trace.status = res.status
    trace.nfev = obj.nfev
    return trace


@dataclass(frozen=True)
class RunSummary:
    E0_exact: float
    Nf: int
    R_Q: int
    l_p: int
    depth: int
    restarts: int
    mean_lI: float
    reach_fraction: float
    R_C: float
    mean_final_energy: float
    std_final_energy: float
    mean_final_fidelity: float
    std_final_fidelity: float
    p10_final_fidelity: float
    p90_final_fidelity: float
    p10_final_energy: float
    p90_final_energy: float
    mean_nfev: float
    line_search_failures: int
    fidelity_threshold: float
    max_iterations: int
    lI_rule: str = "restarts that never reach the threshold count as max_iterations"

    def as_dict(self) -> dict:
        return asdict(self)


def summarize(traces: Sequence[RunTrace], ansatz: Ansatz, ground: GroundSolution, config: VqeConfig) -> RunSummary:
    res = count_resources(ansatz)
    hits = [t.iterations_to_threshold for t in traces]
    capped = [config.max_iterations if k is None else k for k in hits]
    mean_li = float(np.mean(capped))
    e = np.array([t.final_energy for t in traces])
    f = np.array([t.final_fidelity for t in traces])
    return RunSummary(
        E0_exact=ground.energy,
        Nf=ground.n_particles,
        R_Q=res.R_Q,
        l_p=res.l_p,
        depth=res.depth,
        restarts=len(traces),
        mean_lI=mean_li,
        reach_fraction=sum(k is not None for k in hits) / len(traces),
        R_C=res.l_p * mean_li,
        mean_final_energy=float(e.mean()),
        std_final_energy=float(e.std()),
        mean_final_fidelity=float(f.mean()),
        std_final_fidelity=float(f.std()),
        p10_final_fidelity=float(np.percentile(f, 10)),
        p90_final_fidelity=float(np.percentile(f, 90)),
        p10_final_energy=float(np.percentile(e, 10)),
        p90_final_energy=float(np.percentile(e, 90)),
        mean_nfev=float(np.mean([t.nfev for t in traces])),
        line_search_failures=sum(t.status == "line_search_failed" for t in traces),
        fidelity_threshold=config.fidelity_threshold,
        max_iterations=config.max_iterations,
    )


@dataclass
class VqeResult:
    summary: RunSummary
    traces: list[RunTrace]


def _restart_job(args) -> RunTrace:
    return run_single(*args)


def run_vqe(
    h: FermionHamiltonian,
    ansatz: Ansatz,
    ground: GroundSolution,
    config: VqeConfig,
    reference: np.ndarray | None = None,
    register=None,
) -> VqeResult:
    """Independent BFGS runs from small random starts, aggregated by restart index.

    The reference state defaults to ``config.reference`` placed in the ground
    sector.
    """
    if reference is None:
        mask = reference_mask(h.num_modes, ground.n_particles, config.reference, register)
        reference = reference_state(h.num_modes, ground.n_particles, mask)
    jobs = [(ansatz, h, ground, reference, config, r) for r in range(config.restarts)]
    if config.threads > 1 and config.restarts > 1:
        _ = h.matrix  # build once before forking
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            traces = list(pool.map(_restart_job, jobs))
    else:
        traces = [_restart_job(j) for j in jobs]
    return VqeResult(summarize(traces, ansatz, ground, config), traces)
