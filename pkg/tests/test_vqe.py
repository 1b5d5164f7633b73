from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import rosen, rosen_der

from fermivqe.circuits import build_ansatz
from fermivqe.exactsolver import global_ground, sector_solution
from fermivqe.fock import basis_state, reference_state
from fermivqe.hamiltonian import build_spinful_hubbard, build_spinless_hubbard
from fermivqe.lattice import build_geometry
from fermivqe.vqe import (
    LineSearchFailure,
    Objective,
    RunTrace,
    VqeConfig,
    VqeError,
    bfgs_minimize,
    energy_of,
    gradient,
    initial_params,
    run_vqe,
    strong_wolfe,
    summarize,
)


def chain(n):
    return build_geometry("chain", 1, n)


def test_config_validation():
    with pytest.raises(VqeError):
        VqeConfig(restarts=0)
    with pytest.raises(VqeError):
        VqeConfig(gradient_mode="parameter_shift")
    with pytest.raises(VqeError):
        VqeConfig(init_scale=0)
    assert VqeConfig().gradient_mode == "finite_difference"
    assert VqeConfig.from_dict({"restarts": 3, "reference": [0, 3], "junk": 1}).reference == (0, 3)


def test_energy_examples():
    g = chain(12)
    h = build_spinless_hubbard(g)
    a = build_ansatz(g, "fermionic", layers=4)
    assert energy_of(np.zeros(a.num_params), a, h, reference_state(12, 6)) == 0


def test_energy_periodic_in_interaction_angle():
    g = chain(4)
    h = build_spinless_hubbard(g, V=2)
    a = build_ansatz(g, "fermionic", layers=1)
    ref = reference_state(4, 2)
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, a.num_params)
    e = energy_of(x, a, h, ref)
    x[-1] += 2 * np.pi  # last parameter belongs to an interaction gate
    assert energy_of(x, a, h, ref) == pytest.approx(e, abs=1e-12)


@given(st.integers(0, 2**32 - 1), st.sampled_from(["fermionic", "qubit"]))
def test_variational_bound(seed, paradigm):
    g = chain(6)
    h = build_spinless_hubbard(g, V=2)
    sol = sector_solution(h, 3)
    a = build_ansatz(g, paradigm, layers=2)
    x = np.random.default_rng(seed).uniform(-np.pi, np.pi, a.num_params)
    assert energy_of(x, a, h, reference_state(6, 3)) >= sol.energy - 1e-9


@pytest.mark.parametrize("paradigm,spinful", [("fermionic", False), ("qubit", False), ("fermionic", True), ("qubit", True)])
def test_adjoint_matches_finite_difference(paradigm, spinful):
    g = chain(4) if not spinful else chain(3)
    h = build_spinful_hubbard(g, U=2.5, V=0.5) if spinful else build_spinless_hubbard(g, V=2, mu=0.3)
    a = build_ansatz(g, paradigm, spinful=spinful, layers=2)
    ref = reference_state(h.num_modes, h.num_modes // 2)
    rng = np.random.default_rng(4)
    for _ in range(3):
        x = rng.uniform(-np.pi, np.pi, a.num_params)
        adj = gradient(x, a, h, ref, "adjoint")
        fd = gradient(x, a, h, ref, "finite_difference")
        assert np.abs(adj - fd).max() < 1e-6


def test_gradient_zero_at_stationary_point():
    g = chain(2)
    h = build_spinless_hubbard(g)
    a = build_ansatz(g, "fermionic")
    grad = gradient(np.zeros(a.num_params), a, h, basis_state(2, 0b01), "adjoint")
    assert np.linalg.norm(grad) < 1e-6


def test_gradient_vanishes_for_gate_outside_support():
    g = chain(3)
    h = build_spinless_hubbard(g, V=2)
    a = build_ansatz(g, "fermionic")
    x = np.random.default_rng(0).uniform(-2, 2, a.num_params)
    grad = gradient(x, a, h, basis_state(3, 0b001), "adjoint")
    # with one fermion the density-density phases never act
    _, owner = a.derivative_blocks(x)
    assert np.all(grad[a.kinds[owner] == 1] == 0)


def test_bfgs_quadratic():
    rng = np.random.default_rng(2)
    target = rng.normal(size=6)

    def f(x):
        d = x - target
        return float(d @ d), 2 * d

    res = bfgs_minimize(f, rng.normal(size=6) * 5, max_iterations=50)
    assert res.status == "converged"
    assert res.iterations <= 6 + 2
    assert np.abs(res.x - target).max() < 1e-10
    at_opt = bfgs_minimize(f, target.copy())
    assert at_opt.iterations == 0 and at_opt.status == "converged"


def test_bfgs_rosenbrock():
    res = bfgs_minimize(lambda x: (rosen(x), rosen_der(x)), np.array([-1.2, 1.0, 0.5, -0.3]), max_iterations=500, grad_tolerance=1e-9)
    assert res.status == "converged"
    assert np.abs(res.x - 1).max() < 1e-6


@given(st.floats(0.5, 20), st.floats(-3, 3), st.floats(1e-3, 5))
def test_strong_wolfe_conditions(curv, shift, alpha1):
    # phi(a) = curv * (a - s)^2 + sin(a) with a descent start
    def phi(a):
        return curv * (a - shift) ** 2 + np.sin(a), 2 * curv * (a - shift) + np.cos(a)

    f0, d0 = phi(0.0)
    if d0 >= 0:
        with pytest.raises(LineSearchFailure):
            strong_wolfe(phi, f0, d0, alpha1)
        return
    a, fa = strong_wolfe(phi, f0, d0, alpha1)
    assert fa <= f0 + 1e-4 * a * d0
    assert abs(phi(a)[1]) <= 0.9 * abs(d0) + 1e-12


def test_initial_params_streams():
    cfg = VqeConfig(seed=5, init_scale=0.01)
    a, b = initial_params(10, cfg, 0), initial_params(10, cfg, 1)
    assert np.array_equal(a, initial_params(10, cfg, 0))
    assert not np.array_equal(a, b)
    assert np.abs(a).max() <= 0.01


def _small_problem():
    g = chain(6)
    h = build_spinless_hubbard(g, V=2)
    sol = global_ground(h)
    return h, build_ansatz(g, "fermionic", layers=2), sol


def test_run_invariants_and_determinism():
    h, a, sol = _small_problem()
    cfg = VqeConfig(restarts=3, max_iterations=60, gradient_mode="adjoint", seed=11)
    r1 = run_vqe(h, a, sol, cfg)
    r2 = run_vqe(h, a, sol, cfg)
    r3 = run_vqe(h, a, sol, cfg.replace(threads=2))
    for t1, t2, t3 in zip(r1.traces, r2.traces, r3.traces):
        assert t1.energies == t2.energies == t3.energies
        assert t1.fidelities == t2.fidelities == t3.fidelities
        assert np.array_equal(t1.final_params, t3.final_params)
        e = np.array(t1.energies)
        assert np.all(np.diff(e) <= 1e-12)
        assert e.min() >= sol.energy - 1e-9
        assert t1.max_leak <= 1e-12
        assert t1.iterations == list(range(len(t1.iterations)))
    assert r1.summary == r3.summary


def test_finite_difference_mode_runs():
    h, a, sol = _small_problem()
    res = run_vqe(h, a, sol, VqeConfig(restarts=1, max_iterations=5))
    fd_trace = res.traces[0]
    adj = run_vqe(h, a, sol, VqeConfig(restarts=1, max_iterations=5, gradient_mode="adjoint")).traces[0]
    assert np.allclose(fd_trace.energies, adj.energies, atol=1e-6)
    assert fd_trace.nfev > adj.nfev


def test_summary_caps_unreached_restarts():
    h, a, sol = _small_problem()
    cfg = VqeConfig(restarts=2, max_iterations=150)
    traces = []
    for k, hit in enumerate((10, None)):
        t = RunTrace(k, [0, 1], [0.0, -1.0], [0.1, 0.99 if hit else 0.5], np.zeros(a.num_params), hit, "converged", 3)
        traces.append(t)
    s = summarize(traces, a, sol, cfg)
    assert s.mean_lI == (10 + 150) / 2
    assert s.reach_fraction == 0.5
    assert s.R_C == s.l_p * s.mean_lI
    assert "max_iterations" in s.lI_rule


def test_objective_rejects_mismatched_register():
    h, a, _ = _small_problem()
    with pytest.raises(VqeError):
        Objective(build_ansatz(chain(4), "fermionic"), h, reference_state(6, 3))


@pytest.mark.slow
def test_free_chain_converges():
    g = chain(12)
    h = build_spinless_hubbard(g)
    sol = global_ground(h)
    res = run_vqe(h, build_ansatz(g, "fermionic", layers=4), sol, VqeConfig(restarts=3, gradient_mode="adjoint"))
    assert res.summary.mean_final_fidelity >= 0.95
