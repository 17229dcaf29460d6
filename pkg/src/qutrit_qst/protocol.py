"""Two-stage qutrit state transfer: swap through the resonators, then a pi pulse."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import IntegratorConfig, evolve_schrodinger, propagate_master, step_count
from .hilbert import E, F, G, DomainError, SpaceLayout, basis_ket, min_eigenvalue_hermitian
from .model import ModelParams, collapse_operators, stage1_drive, stage2_drive

NORM_TOL = 1e-10
FIDELITY_SLACK = 1e-9


class ConsistencyError(RuntimeError):
    """A computed quantity violates a bound it must satisfy by construction."""


@dataclass(frozen=True)
class InputState:
    """Qutrit-1 amplitudes alpha|g> + beta|e> + gamma|f>."""

    alpha: complex
    beta: complex
    gamma: complex

    def __post_init__(self):
        norm2 = abs(self.alpha) ** 2 + abs(self.beta) ** 2 + abs(self.gamma) ** 2
        if not abs(norm2 - 1) <= NORM_TOL:
            raise DomainError(f"amplitudes are not normalized: |a|^2+|b|^2+|c|^2 = {norm2!r}")

    @classmethod
    def equal_superposition(cls) -> "InputState":
        a = 1 / math.sqrt(3)
        return cls(a, a, a)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "InputState":
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        z /= np.linalg.norm(z)
        return cls(*(complex(x) for x in z))

    @property
    def amplitudes(self) -> tuple[complex, complex, complex]:
        return (complex(self.alpha), complex(self.beta), complex(self.gamma))


def prepare_initial(s: InputState, layout: SpaceLayout) -> np.ndarray:
    """(alpha|g> + beta|e> + gamma|f>)_1 |0>|0> |g>_2."""
    return sum(a * basis_ket(q, 0, 0, G, layout) for a, q in zip(s.amplitudes, (G, E, F)))


def ideal_target(s: InputState, layout: SpaceLayout) -> np.ndarray:
    """|g>_1 |0>|0> (alpha|g> + beta|e> + gamma|f>)_2."""
    return sum(a * basis_ket(G, 0, 0, q, layout) for a, q in zip(s.amplitudes, (G, E, F)))


def stage_durations(g: float, Omega: float) -> tuple[float, float]:
    """Swap time pi/(sqrt(2) g) and pi-pulse time pi/Omega, in ns."""
    if not (g > 0 and Omega > 0):
        raise DomainError(f"g and Omega must be positive, got g={g!r}, Omega={Omega!r}")
    return math.pi / (math.sqrt(2) * g), math.pi / Omega


def fidelity(rho: np.ndarray, target: np.ndarray) -> float:
    """F = sqrt(<target|rho|target>)."""
    rho = np.asarray(rho)
    target = np.asarray(target)
    if rho.shape != (target.shape[0], target.shape[0]):
        raise DomainError(f"shape mismatch: rho {rho.shape}, target {target.shape}")
    overlap = np.vdot(target, rho @ target)
    if abs(overlap.imag) >= 1e-10:
        raise ConsistencyError(f"<psi|rho|psi> has imaginary part {overlap.imag:.3e}")
    return math.sqrt(max(overlap.real, 0.0))


@dataclass(frozen=True)
class TransferResult:
    rho_final: np.ndarray
    fidelity: float
    t1: float
    t2: float
    steps: int
    max_trace_drift: float
    min_eigenvalue: float

    @property
    def t_total(self) -> float:
        return self.t1 + self.t2


def omega_max(p: ModelParams, ideal: bool = False) -> float:
    """Fastest angular frequency the integrator has to resolve."""
    g_max = max(p.g_eg_1, p.g_eg_2, p.g_fg_1, p.g_fg_2)
    candidates = [math.sqrt(2) * g_max, p.Omega]
    if not ideal:
        candidates += [abs(p.Delta), abs(p.delta)]
    return max(candidates)


def run_transfer(
    p: ModelParams,
    s: InputState,
    cfg: IntegratorConfig = IntegratorConfig(),
    ideal: bool = False,
    reset_clock: bool = False,
) -> TransferResult:
    """Run both stages and score the final state against the ideal target.

    The swap lasts pi/(sqrt(2) g_eg_1) and the pulse pi/Omega. With ``ideal``
    the detuning, crosstalk and all dissipation are dropped and the pure state
    is propagated. Otherwise stage 1 runs on t in [0, t1] and stage 2 continues
    the same clock on [t1, t1 + t2] (restarted at zero with ``reset_clock``).
    When every collapse operator vanishes the master equation reduces to the
    Schrodinger equation, which is then integrated instead.
    """
    layout = p.layout
    t1, t2 = stage_durations(p.g_eg_1, p.Omega)
    cfg.check_resolution(omega_max(p, ideal))
    psi0 = prepare_initial(s, layout)
    target = ideal_target(s, layout)

    h1 = stage1_drive(p, ideal=ideal)
    h2 = stage2_drive(p, ideal=ideal)
    if reset_clock:
        h2 = h2.shifted(t1)

    c = [] if ideal else [op for op in collapse_operators(p) if np.any(op)]
    if c:
        rho = np.outer(psi0, psi0.conj())
        rho, st1 = propagate_master(rho, h1, c, 0.0, t1, cfg)
        rho, st2 = propagate_master(rho, h2, c, t1, t1 + t2, cfg)
        steps = st1.steps + st2.steps
        drift = max(st1.max_trace_drift, st2.max_trace_drift)
        lam = st2.min_eigenvalue
    else:
        psi = evolve_schrodinger(psi0, h1, 0.0, t1, cfg)
        psi = evolve_schrodinger(psi, h2, t1, t1 + t2, cfg)
        rho = np.outer(psi, psi.conj())
        steps = step_count(0.0, t1, cfg.dt) + step_count(t1, t1 + t2, cfg.dt)
        drift = 0.0
        lam = min_eigenvalue_hermitian(rho)

    f = fidelity(rho, target)
    if not 0.0 <= f <= 1 + FIDELITY_SLACK:
        raise ConsistencyError(f"fidelity {f!r} outside [0, 1]")
    return TransferResult(rho, f, t1, t2, steps, drift, lam)

