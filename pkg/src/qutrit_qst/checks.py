"""Fast built-in oracle and invariant checks, run by ``qutrit-qst check``."""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .dynamics import (
    IntegratorConfig,
    closed_form_stage1,
    closed_form_stage2,
    evolve_schrodinger,
    propagate_master,
    unitary_expm,
)
from .hilbert import E, F, G, basis_ket, is_hermitian
from .model import (
    ModelParams,
    collapse_operators,
    excitation_number,
    ideal_stage1_hamiltonian,
    ideal_stage2_hamiltonian,
    realistic_stage1_hamiltonian,
    stage1_drive,
    stage2_drive,
    stage2_hamiltonian,
)
from .protocol import InputState, prepare_initial, run_transfer


def _index_bijection(p):
    layout = p.layout
    idx = sorted(layout.index(*lab) for lab in layout.labels())
    return idx == list(range(layout.total_dim)), f"{layout.total_dim} basis states"


def _hamiltonians(p):
    n = excitation_number(p.layout)
    worst_h = worst_c = 0.0
    for t in np.linspace(0.0, 9.0, 13):
        for h in (ideal_stage1_hamiltonian(p), realistic_stage1_hamiltonian(p, t),
                  ideal_stage2_hamiltonian(p), stage2_hamiltonian(p, t)):
            worst_h = max(worst_h, np.max(np.abs(h - h.conj().T)))
            worst_c = max(worst_c, np.max(np.abs(h @ n - n @ h)))
    ok = worst_h < 1e-12 and worst_c < 1e-12
    return ok, f"hermiticity {worst_h:.1e}, [H, N] {worst_c:.1e}"


def _stage1_oracle(p, cfg):
    g = p.g_eg_1
    sym = replace(p, g_fg_1=g, g_fg_2=g, g_eg_2=g)
    psi0 = prepare_initial(InputState.equal_superposition(), p.layout)
    h = stage1_drive(sym, ideal=True)
    worst, t_prev, psi = 0.0, 0.0, psi0
    for t in np.linspace(0.0, 5.0, 6)[1:]:
        psi = evolve_schrodinger(psi, h, t_prev, t, cfg)
        t_prev = t
        worst = max(worst, np.linalg.norm(psi - closed_form_stage1(psi0, g, t, p.layout)))
    return worst < 1e-8, f"max deviation {worst:.1e}"


def _stage2_oracle(p, cfg):
    layout = p.layout
    psi0 = (basis_ket(G, 0, 0, E, layout) + basis_ket(G, 0, 0, F, layout)) / math.sqrt(2)
    t = 0.37 * math.pi / p.Omega
    num = evolve_schrodinger(psi0, stage2_drive(p, ideal=True), 0.0, t, cfg)
    ref = closed_form_stage2(psi0, p.Omega, t, layout)
    exact = unitary_expm(ideal_stage2_hamiltonian(p), t) @ psi0
    d1, d2 = np.linalg.norm(num - ref), np.linalg.norm(exact - ref)
    return d1 < 1e-8 and d2 < 1e-10, f"RK4 {d1:.1e}, spectral {d2:.1e}"


def _ideal_transfer(p, cfg):
    rng = np.random.default_rng(7)
    clean = ModelParams(
        g_eg_1=p.g_eg_1, g_eg_2=p.g_eg_1, g_fg_1=p.g_eg_1, g_fg_2=p.g_eg_1,
        omega_c1=p.omega_c1, omega_c2=p.omega_c2, Omega=p.Omega, layout=p.layout,
    )
    worst = 0.0
    for _ in range(5):
        worst = max(worst, abs(1 - run_transfer(clean, InputState.random(rng), cfg).fidelity))
    return worst < 1e-9, f"max |1 - F| {worst:.1e}"


def _lindblad_invariants(p, cfg):
    psi0 = prepare_initial(InputState.equal_superposition(), p.layout)
    rho = np.outer(psi0, psi0.conj())
    c = collapse_operators(p)
    n = excitation_number(p.layout)
    h = stage1_drive(p)
    # accelerate decay so a short run moves <N> measurably
    c = [50.0 * op for op in c]
    occupations = [np.trace(n @ rho).real]
    worst_drift, lam = 0.0, 1.0
    for k in range(10):
        rho, st = propagate_master(rho, h, c, 0.2 * k, 0.2 * (k + 1), cfg)
        worst_drift = max(worst_drift, st.max_trace_drift)
        lam = min(lam, st.min_eigenvalue)
        occupations.append(np.trace(n @ rho).real)
    monotone = all(b <= a + 1e-9 for a, b in zip(occupations, occupations[1:]))
    ok = worst_drift < 1e-8 and lam >= -1e-8 and monotone and is_hermitian(rho)
    return ok, f"trace drift {worst_drift:.1e}, min eigenvalue {lam:.1e}, <N> monotone {monotone}"


def run_checks(p: ModelParams, cfg: IntegratorConfig = IntegratorConfig()):
    """Return ``[(name, passed, detail), ...]``; never touches the filesystem."""
    checks = [
        ("basis index bijection", lambda: _index_bijection(p)),
        ("Hamiltonians Hermitian and conserve N", lambda: _hamiltonians(p)),
        ("swap stage matches closed form", lambda: _stage1_oracle(p, cfg)),
        ("pulse stage matches closed form", lambda: _stage2_oracle(p, cfg)),
        ("noiseless transfer is exact", lambda: _ideal_transfer(p, cfg)),
        ("master equation invariants", lambda: _lindblad_invariants(p, cfg)),
    ]
    results = []
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, not a CLI crash
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
    return results

