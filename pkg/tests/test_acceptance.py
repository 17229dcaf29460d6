"""Exit criteria of the package, one test per criterion.

Run ``pytest tests/test_acceptance.py`` to get one PASS/FAIL line per
criterion in the terminal summary.
"""
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qutrit_qst.config import RunConfig
from qutrit_qst.dynamics import (
    IntegratorConfig,
    closed_form_stage1,
    closed_form_stage2,
    evolve_schrodinger,
    propagate_master,
    unitary_expm,
)
from qutrit_qst.hilbert import E, F, G, SpaceLayout, basis_ket, min_eigenvalue_hermitian
from qutrit_qst.model import (
    HarmonicHamiltonian,
    collapse_operators,
    excitation_number,
    stage1_drive,
    stage2_drive,
)
from qutrit_qst.protocol import InputState, prepare_initial, run_transfer, stage_durations
from qutrit_qst.sweep import (
    DEFAULT_C_GRID,
    DEFAULT_DELTA_GRID_MHZ,
    grid_mhz,
    quality_factors,
    sweep_detuning_asymmetry,
)

from conftest import NOISELESS, random_hermitian

PAPER = RunConfig()
S = InputState.equal_superposition()
CFG = IntegratorConfig()
FIG4_SPOTS = [(20.0, 0.96, 0.990), (40.0, 0.99, 0.975), (60.0, 1.02, 0.950), (80.0, 1.05, 0.915)]

# every noisy transfer executed here, for the integrator-invariant criterion
RUNS = {}


def transfer(key, cfg: RunConfig, integ=CFG):
    if key not in RUNS:
        RUNS[key] = run_transfer(cfg.params(), cfg.input_state(), integ)
    return RUNS[key]


@pytest.fixture(scope="module")
def fig4_grid():
    return sweep_detuning_asymmetry(grid_mhz(DEFAULT_DELTA_GRID_MHZ), DEFAULT_C_GRID,
                                    PAPER.params(), S, CFG)


def test_c01_ideal_transfer(report):
    p = RunConfig(**NOISELESS).params()
    assert p.delta == p.g12 == 0 and not any(p.rates.values())
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = max(abs(run_transfer(p, InputState.random(rng), CFG).fidelity - 1) for _ in range(50))
    elapsed = time.perf_counter() - start
    ok = report("C1 ideal transfer", worst < 1e-9 and elapsed < 10,
                f"max |F-1| = {worst:.2e} over 50 states (< 1e-9), {elapsed:.1f} s (< 10 s)")
    assert ok


def test_c02_headline_fidelity(report):
    start = time.perf_counter()
    f = transfer("paper", PAPER).fidelity
    elapsed = time.perf_counter() - start
    ok = report("C2 headline fidelity", abs(f - 0.997) <= 0.005 and elapsed < 30,
                f"F = {f:.6f} (0.997 +/- 0.005), {elapsed:.1f} s (< 30 s)")
    assert ok


def test_c03_crosstalk_insensitivity(report):
    f_01 = transfer("paper", PAPER).fidelity
    f_00 = transfer("g12=0", PAPER.replace(g12_ratio=0.0)).fidelity
    ok = report("C3 crosstalk insensitivity", abs(f_01 - f_00) < 0.005,
                f"|F(0.1g) - F(0)| = {abs(f_01 - f_00):.2e} (< 0.005)")
    assert ok


def test_c04_fig4_spot_values(report):
    details, ok = [], True
    for d, c, expected in FIG4_SPOTS:
        f = transfer(("fig4", d, c), PAPER.replace(delta_over_2pi_MHz=d, c=c)).fidelity
        ok &= abs(f - expected) <= 0.01
        details.append(f"({d:g} MHz, {c:g}) -> {f:.4f} vs {expected:.3f}")
    assert report("C4 Fig. 4 spot values", ok, "; ".join(details) + " (+/- 0.01)")


def test_c05_fig4_floor(report, fig4_grid):
    f = fig4_grid.column("fidelity")
    assert len(f) == len(DEFAULT_DELTA_GRID_MHZ) * len(DEFAULT_C_GRID) == 187
    worst = fig4_grid.rows[int(np.argmin(f))]
    ok = report("C5 Fig. 4 floor", f.min() > 0.91,
                f"min F = {f.min():.4f} at delta/2pi = {worst[0]:g} MHz, c = {worst[1]:g} (> 0.91)")
    assert ok


def test_c06_timing(report):
    p = PAPER.params()
    t1, t2 = stage_durations(p.g_eg_1, p.Omega)
    total = t1 + t2
    ok = report("C6 timing", abs(total - 8.536) < 5e-4 and abs(total - 8.5) < 0.1,
                f"t1 = {t1:.4f} ns, t2 = {t2:.4f} ns, t_total = {total:.4f} ns (8.536; ~8.5 +/- 0.1)")
    assert ok


def test_c07_quality_factors(report):
    q1, q2 = quality_factors(PAPER.params())
    ok = report("C7 quality factors",
                abs(q1 / 5.7e5 - 1) < 0.02 and abs(q2 / 8.8e5 - 1) < 0.02,
                f"Q1 = {q1:.4g} (5.7e5), Q2 = {q2:.4g} (8.8e5), within 2%")
    assert ok


SYM = RunConfig(**NOISELESS).params()
SPAN = [(G, 0, 0, G), (E, 0, 0, G), (G, 1, 0, G), (G, 0, 0, E),
        (F, 0, 0, G), (G, 0, 1, G), (G, 0, 0, F)]
ORACLE_WORST = {"stage1": 0.0, "stage2": 0.0, "stage2_rk4": 0.0, "spectral": 0.0}


def _unit(v):
    v = np.asarray(v, dtype=complex)
    return v / np.linalg.norm(v)


amplitudes = st.lists(st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False),
                      min_size=7, max_size=7).filter(lambda a: np.linalg.norm(a) > 0.1)


@settings(max_examples=25, deadline=None)
@given(amps=amplitudes, t=st.floats(0.0, 10.0))
def test_c08a_stage1_oracle(amps, t):
    layout = SpaceLayout(1)
    psi0 = _unit(sum(a * basis_ket(*k, layout) for a, k in zip(amps, SPAN)))
    num = evolve_schrodinger(psi0, stage1_drive(SYM, ideal=True), 0.0, t, CFG)
    err = np.linalg.norm(num - closed_form_stage1(psi0, SYM.g_eg_1, t, layout))
    ORACLE_WORST["stage1"] = max(ORACLE_WORST["stage1"], err)
    assert err < 1e-8


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t=st.floats(0.0, 10.0))
def test_c08b_stage2_oracle(seed, t):
    r = np.random.default_rng(seed)
    psi0 = _unit(r.normal(size=36) + 1j * r.normal(size=36))
    ref = closed_form_stage2(psi0, SYM.Omega, t)
    exact = unitary_expm(stage2_drive(SYM, ideal=True)(0.0), t) @ psi0
    num = evolve_schrodinger(psi0, stage2_drive(SYM, ideal=True), 0.0, t, CFG)
    ORACLE_WORST["stage2"] = max(ORACLE_WORST["stage2"], np.linalg.norm(exact - ref))
    ORACLE_WORST["stage2_rk4"] = max(ORACLE_WORST["stage2_rk4"], np.linalg.norm(num - ref))
    assert np.linalg.norm(exact - ref) < 1e-10
    assert np.linalg.norm(num - ref) < 1e-10


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t=st.floats(0.0, 10.0))
def test_c08c_spectral_oracle(seed, t):
    r = np.random.default_rng(seed)
    h = 0.3 * random_hermitian(r, 36)
    psi0 = _unit(r.normal(size=36) + 1j * r.normal(size=36))
    upper = np.triu(h, 1) + np.diag(np.diag(h)) / 2
    num = evolve_schrodinger(psi0, HarmonicHamiltonian([(0.0, upper)], 36), 0.0, t, CFG)
    err = np.linalg.norm(num - unitary_expm(h, t) @ psi0)
    ORACLE_WORST["spectral"] = max(ORACLE_WORST["spectral"], err)
    assert err < 1e-8


def test_c08_oracle_summary(report):
    w = ORACLE_WORST
    ok = w["stage1"] < 1e-8 and w["stage2"] < 1e-10 and w["stage2_rk4"] < 1e-10 and w["spectral"] < 1e-8
    assert report("C8 oracle equivalence", ok,
                  f"swap vs closed form {w['stage1']:.1e} (< 1e-8); pulse vs rotation "
                  f"{w['stage2']:.1e} spectral / {w['stage2_rk4']:.1e} RK4 (< 1e-10); "
                  f"RK4 vs spectral exponential {w['spectral']:.1e} (< 1e-8)")


def test_c09_lindblad_invariants(report, fig4_grid):
    # make sure the recorded runs exist even when this test runs alone
    transfer("paper", PAPER)
    for d, c, _ in FIG4_SPOTS:
        transfer(("fig4", d, c), PAPER.replace(delta_over_2pi_MHz=d, c=c))
    diags = [(r.max_trace_drift, r.min_eigenvalue) for r in RUNS.values()]
    diags += list(fig4_grid.diagnostics)
    drift = max(d for d, _ in diags)
    lam = min(m for _, m in diags)

    # <N> along the headline run, 25 samples across both stages
    p = PAPER.params()
    layout = p.layout
    n_op = excitation_number(layout)
    c = collapse_operators(p)
    psi0 = prepare_initial(S, layout)
    rho = np.outer(psi0, psi0.conj())
    t1, t2 = stage_durations(p.g_eg_1, p.Omega)
    grid = np.concatenate([np.linspace(0, t1, 12), np.linspace(t1, t1 + t2, 14)[1:]])
    occ = [np.trace(n_op @ rho).real]
    for a, b in zip(grid, grid[1:]):
        h = stage1_drive(p) if b <= t1 + 1e-12 else stage2_drive(p)
        rho, st_ = propagate_master(rho, h, c, a, b, CFG)
        drift = max(drift, st_.max_trace_drift)
        occ.append(np.trace(n_op @ rho).real)
    lam = min(lam, min_eigenvalue_hermitian(rho))
    monotone = all(y <= x + 1e-9 for x, y in zip(occ, occ[1:]))

    # dt halving at the headline point and the four Fig. 4 spots
    half = CFG.refined(1)
    changes = [abs(transfer("paper", PAPER).fidelity - transfer("paper/2", PAPER, half).fidelity)]
    for d, c_, _ in FIG4_SPOTS:
        cfg = PAPER.replace(delta_over_2pi_MHz=d, c=c_)
        changes.append(abs(transfer(("fig4", d, c_), cfg).fidelity
                           - transfer(("fig4/2", d, c_), cfg, half).fidelity))
    for r in RUNS.values():
        drift = max(drift, r.max_trace_drift)
        lam = min(lam, r.min_eigenvalue)

    ok = drift < 1e-8 and lam >= -1e-8 and monotone and len(occ) >= 20 and max(changes) < 1e-6
    assert report("C9 Lindblad invariants", ok,
                  f"max trace drift {drift:.1e} (< 1e-8), min eigenvalue {lam:.1e} (>= -1e-8) "
                  f"over {len(RUNS) + len(fig4_grid.diagnostics)} runs; "
                  f"<N> non-increasing over {len(occ)} samples: {monotone}; "
                  f"max dt-halving |dF| {max(changes):.1e} (< 1e-6)")


def test_c10_truncation_exactness(report):
    f1 = transfer("paper", PAPER).fidelity
    f2 = transfer("paper n_max=2", PAPER.replace(n_max=2)).fidelity
    ok = report("C10 truncation exactness", abs(f1 - f2) < 1e-10,
                f"|F(n_max=2) - F(n_max=1)| = {abs(f1 - f2):.1e} (< 1e-10)")
    assert ok
