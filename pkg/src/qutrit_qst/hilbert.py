"""Composite Hilbert space of two qutrits and two truncated resonator modes.

Subsystem order is fixed as (qutrit 1, resonator 1, resonator 2, qutrit 2)
and qutrit levels are ordered (g, e, f) = (0, 1, 2).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

G, E, F = 0, 1, 2
LEVEL_NAMES = ("g", "e", "f")

# subsystem slots in Kronecker order
QUTRIT1, RESONATOR1, RESONATOR2, QUTRIT2 = 0, 1, 2, 3

HERMITIAN_TOL = 1e-10


class DomainError(ValueError):
    """Raised when an argument lies outside an operation's domain."""


@dataclass(frozen=True)
class SpaceLayout:
    """Dimensions of the (q1, r1, r2, q2) product space."""

    n_max: int = 1

    def __post_init__(self):
        if isinstance(self.n_max, bool) or int(self.n_max) != self.n_max or self.n_max < 1:
            raise DomainError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    @property
    def n_levels(self) -> int:
        return self.n_max + 1

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return (3, self.n_levels, self.n_levels, 3)

    @property
    def total_dim(self) -> int:
        return 9 * self.n_levels**2

    def index(self, q1: int, n1: int, n2: int, q2: int) -> int:
        for name, q in (("q1", q1), ("q2", q2)):
            if q not in (G, E, F):
                raise DomainError(f"{name}={q!r} is not a qutrit level")
        for name, n in (("n1", n1), ("n2", n2)):
            if not 0 <= n <= self.n_max:
                raise DomainError(f"{name}={n!r} outside [0, {self.n_max}]")
        d = self.n_levels
        return ((q1 * d + n1) * d + n2) * 3 + q2

    def labels(self):
        """Yield ``(q1, n1, n2, q2)`` in flat-index order."""
        d = self.n_levels
        for q1 in range(3):
            for n1 in range(d):
                for n2 in range(d):
                    for q2 in range(3):
                        yield q1, n1, n2, q2


def basis_ket(q1: int, n1: int, n2: int, q2: int, layout: SpaceLayout) -> np.ndarray:
    """Return the product basis vector |q1, n1, n2, q2>."""
    psi = np.zeros(layout.total_dim, dtype=complex)
    psi[layout.index(q1, n1, n2, q2)] = 1.0
    return psi


def annihilation(n_max: int) -> np.ndarray:
    """Truncated bosonic lowering operator on occupations 0..n_max."""
    if isinstance(n_max, bool) or int(n_max) != n_max or n_max < 1:
        raise DomainError(f"n_max must be an integer >= 1, got {n_max!r}")
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1).astype(complex)


def transition(upper: int, lower: int) -> np.ndarray:
    """Qutrit operator |upper><lower|; ``upper == lower`` gives a projector."""
    for q in (upper, lower):
        if q not in (G, E, F):
            raise DomainError(f"{q!r} is not a qutrit level")
    op = np.zeros((3, 3), dtype=complex)
    op[upper, lower] = 1.0
    return op


def tensor_embed(op: np.ndarray, slot: int, layout: SpaceLayout) -> np.ndarray:
    """Lift a single-subsystem operator into the full product space.

    Parameters
    ----------
    op : ndarray
        Square matrix acting on subsystem ``slot``.
    slot : int
        One of ``QUTRIT1``, ``RESONATOR1``, ``RESONATOR2``, ``QUTRIT2``.
    layout : SpaceLayout
    """
    dims = layout.dims
    if slot not in range(4):
        raise DomainError(f"slot must be 0..3, got {slot!r}")
    op = np.asarray(op, dtype=complex)
    if op.shape != (dims[slot], dims[slot]):
        raise DomainError(
            f"operator shape {op.shape} does not match slot {slot} dimension {dims[slot]}"
        )
    factors = [op if k == slot else np.eye(d, dtype=complex) for k, d in enumerate(dims)]
    return reduce(np.kron, factors)


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - dagger(m)), initial=0.0) <= tol


def min_eigenvalue_hermitian(m: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian matrix (LAPACK ``heevd``)."""
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m):
        raise DomainError("matrix is not Hermitian within 1e-10")
    # symmetrize away round-off below the tolerance before the solver sees it
    return float(np.linalg.eigvalsh(0.5 * (m + dagger(m)))[0])
