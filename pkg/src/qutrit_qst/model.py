"""Hamiltonians and collapse operators of the two-qutrit, two-resonator device.

All quantities are in rad/ns (couplings, detunings) and 1/ns (rates); paper-facing
units are converted in :mod:`qutrit_qst.config`, never here.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field, fields

import numpy as np

from .hilbert import (
    E,
    F,
    G,
    QUTRIT1,
    QUTRIT2,
    RESONATOR1,
    RESONATOR2,
    DomainError,
    SpaceLayout,
    annihilation,
    dagger,
    tensor_embed,
    transition,
)

_NONNEGATIVE = (
    "g_eg_1", "g_eg_2", "g_fg_1", "g_fg_2", "g12", "Omega",
    "kappa_1", "kappa_2", "gamma_eg", "gamma_fe", "gamma_fg", "gamma_phi_e", "gamma_phi_f",
)


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the device, internal units (rad/ns, 1/ns).

    ``delta`` is the common qutrit-resonator detuning and may be negative.
    ``Delta`` is always ``omega_c2 - omega_c1``; passing an inconsistent value
    raises.
    """

    g_eg_1: float = 0.0
    g_eg_2: float = 0.0
    g_fg_1: float = 0.0
    g_fg_2: float = 0.0
    g12: float = 0.0
    delta: float = 0.0
    omega_c1: float = 0.0
    omega_c2: float = 0.0
    Omega: float = 0.0
    kappa_1: float = 0.0
    kappa_2: float = 0.0
    gamma_eg: float = 0.0
    gamma_fe: float = 0.0
    gamma_fg: float = 0.0
    gamma_phi_e: float = 0.0
    gamma_phi_f: float = 0.0
    layout: SpaceLayout = field(default_factory=SpaceLayout)
    Delta: float | None = None

    def __post_init__(self):
        for f in fields(self):
            if f.name in ("layout", "Delta"):
                continue
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not np.isfinite(v):
                raise DomainError(f"{f.name} must be a finite real number, got {v!r}")
        for name in _NONNEGATIVE:
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0, got {getattr(self, name)!r}")
        if self.omega_c1 < 0 or self.omega_c2 < 0:
            raise DomainError("resonator frequencies must be >= 0")
        if not isinstance(self.layout, SpaceLayout):
            raise DomainError("layout must be a SpaceLayout")
        derived = self.omega_c2 - self.omega_c1
        if self.Delta is None:
            object.__setattr__(self, "Delta", derived)
        elif self.Delta != derived:
            raise DomainError(f"Delta={self.Delta!r} differs from omega_c2 - omega_c1 = {derived!r}")

    @property
    def rates(self) -> dict[str, float]:
        return {
            name: getattr(self, name)
            for name in ("kappa_1", "kappa_2", "gamma_eg", "gamma_fe", "gamma_fg",
                         "gamma_phi_e", "gamma_phi_f")
        }


class HarmonicHamiltonian:
    """H(t) = sum_k (exp(i w_k t) O_k + h.c.) over a fixed list of (w_k, O_k).

    Every Hamiltonian of the protocol has this form, so it is stored
    symbolically. Calling the object returns the dense matrix at time ``t``;
    :meth:`entries` exposes the sparse form used by the compiled integrator.
    """

    def __init__(self, terms, dim: int):
        self.dim = dim
        self.terms = tuple((float(w), np.asarray(op, dtype=complex)) for w, op in terms)
        for _, op in self.terms:
            if op.shape != (dim, dim):
                raise DomainError(f"term shape {op.shape} != ({dim}, {dim})")

    def __call__(self, t: float) -> np.ndarray:
        h = np.zeros((self.dim, self.dim), dtype=complex)
        for w, op in self.terms:
            h += cmath.exp(1j * w * t) * op
        return h + dagger(h)

    def shifted(self, t_offset: float) -> "HarmonicHamiltonian":
        """Same Hamiltonian with its clock restarted at ``t_offset``."""
        return HarmonicHamiltonian(
            [(w, cmath.exp(-1j * w * t_offset) * op) for w, op in self.terms], self.dim
        )

    def entries(self):
        """Sparse (rows, cols, values, frequencies) such that
        H(t)[r, c] = sum over matching entries of value * exp(i * frequency * t)."""
        rows, cols, vals, freqs = [], [], [], []
        for w, op in self.terms:
            r, c = np.nonzero(op)
            for m, (rr, cc, ww) in enumerate(((r, c, w), (c, r, -w))):
                rows.append(rr)
                cols.append(cc)
                vals.append(op[r, c] if m == 0 else op[r, c].conj())
                freqs.append(np.full(len(r), ww))
        if not rows:
            empty = np.zeros(0)
            return empty.astype(np.int64), empty.astype(np.int64), empty.astype(complex), empty
        return (np.concatenate(rows).astype(np.int64), np.concatenate(cols).astype(np.int64),
                np.concatenate(vals).astype(complex), np.concatenate(freqs).astype(float))

    @property
    def max_frequency(self) -> float:
        return max((abs(w) for w, op in self.terms if np.any(op)), default=0.0)


def _ops(layout: SpaceLayout):
    a = annihilation(layout.n_max)
    a1 = tensor_embed(a, RESONATOR1, layout)
    a2 = tensor_embed(a, RESONATOR2, layout)
    q1 = lambda op: tensor_embed(op, QUTRIT1, layout)  # noqa: E731
    q2 = lambda op: tensor_embed(op, QUTRIT2, layout)  # noqa: E731
    return a1, a2, q1, q2


def _coupling_term(p: ModelParams) -> np.ndarray:
    # a1 sigma+_eg,j and a2 sigma+_fg,j; the h.c. half is added by HarmonicHamiltonian
    a1, a2, q1, q2 = _ops(p.layout)
    up_e, up_f = transition(E, G), transition(F, G)
    return (p.g_eg_1 * a1 @ q1(up_e) + p.g_eg_2 * a1 @ q2(up_e)
            + p.g_fg_1 * a2 @ q1(up_f) + p.g_fg_2 * a2 @ q2(up_f))


def _crosstalk_term(p: ModelParams) -> np.ndarray:
    a1, a2, _, _ = _ops(p.layout)
    return p.g12 * a1 @ dagger(a2)


def stage1_drive(p: ModelParams, ideal: bool = False) -> HarmonicHamiltonian:
    """Resonator-mediated swap Hamiltonian; ``ideal`` drops detuning and crosstalk."""
    dim = p.layout.total_dim
    if ideal:
        return HarmonicHamiltonian([(0.0, _coupling_term(p))], dim)
    return HarmonicHamiltonian(
        [(p.delta, _coupling_term(p)), (p.Delta, _crosstalk_term(p))], dim
    )


def stage2_drive(p: ModelParams, ideal: bool = False) -> HarmonicHamiltonian:
    """Resonant e<->f pulse on qutrit 2, plus resonator crosstalk unless ``ideal``."""
    _, _, _, q2 = _ops(p.layout)
    dim = p.layout.total_dim
    pulse = (0.0, p.Omega * q2(transition(E, F)))
    if ideal:
        return HarmonicHamiltonian([pulse], dim)
    return HarmonicHamiltonian([pulse, (p.Delta, _crosstalk_term(p))], dim)


def ideal_stage1_hamiltonian(p: ModelParams) -> np.ndarray:
    return stage1_drive(p, ideal=True)(0.0)


def realistic_stage1_hamiltonian(p: ModelParams, t: float) -> np.ndarray:
    return stage1_drive(p)(t)


def ideal_stage2_hamiltonian(p: ModelParams) -> np.ndarray:
    return stage2_drive(p, ideal=True)(0.0)


def stage2_hamiltonian(p: ModelParams, t: float) -> np.ndarray:
    """Stage-2 Hamiltonian at global protocol time ``t``."""
    return stage2_drive(p)(t)


COLLAPSE_LABELS = (
    "kappa_1", "kappa_2",
    "gamma_eg_1", "gamma_fe_1", "gamma_fg_1",
    "gamma_eg_2", "gamma_fe_2", "gamma_fg_2",
    "gamma_phi_e_1", "gamma_phi_f_1", "gamma_phi_e_2", "gamma_phi_f_2",
)


def collapse_operators(p: ModelParams) -> list[np.ndarray]:
    """Rate-scaled collapse operators in the order of ``COLLAPSE_LABELS``.

    Each entry C enters the dissipator as C rho C^+ - {C^+ C, rho}/2. Dephasing
    uses the level projectors, which reproduces the explicit dephasing terms
    of the master equation because P^+ P = P.
    """
    a1, a2, q1, q2 = _ops(p.layout)
    ops = [np.sqrt(p.kappa_1) * a1, np.sqrt(p.kappa_2) * a2]
    for q in (q1, q2):
        ops += [
            np.sqrt(p.gamma_eg) * q(transition(G, E)),
            np.sqrt(p.gamma_fe) * q(transition(E, F)),
            np.sqrt(p.gamma_fg) * q(transition(G, F)),
        ]
    for q in (q1, q2):
        ops += [np.sqrt(p.gamma_phi_e) * q(transition(E, E)),
                np.sqrt(p.gamma_phi_f) * q(transition(F, F))]
    return ops


def excitation_number(layout: SpaceLayout) -> np.ndarray:
    """N = a1^+ a1 + a2^+ a2 + sum_j (|e><e|_j + |f><f|_j), diagonal."""
    diag = [n1 + n2 + (q1 > 0) + (q2 > 0) for q1, n1, n2, q2 in layout.labels()]
    return np.diag(np.asarray(diag, dtype=float)).astype(complex)
