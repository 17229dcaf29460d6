"""Time propagation: Lindblad master equation, Schrodinger equation, closed forms.

Both propagators use classical fixed-step RK4. Hamiltonians given as
:class:`~qutrit_qst.model.HarmonicHamiltonian` run through compiled sparse
kernels; any other callable ``t -> H(t)`` falls back to dense numpy, which is
also the reference the kernels are tested against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .hilbert import (
    E,
    F,
    G,
    DomainError,
    SpaceLayout,
    dagger,
    is_hermitian,
    min_eigenvalue_hermitian,
)
from .model import HarmonicHamiltonian

TRACE_FAIL = 1e-6
POSITIVITY_FAIL = -1e-6
NORM_FAIL = 1e-6


class IntegratorError(RuntimeError):
    """Propagation drifted outside the physical state space; reduce dt."""


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    refine_factor: int = 2
    convergence_tol: float = 1e-6

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise DomainError(f"dt must be positive, got {self.dt!r}")
        if int(self.refine_factor) != self.refine_factor or self.refine_factor < 2:
            raise DomainError(f"refine_factor must be an integer >= 2, got {self.refine_factor!r}")
        if not self.convergence_tol > 0:
            raise DomainError("convergence_tol must be positive")

    def check_resolution(self, omega_max: float) -> None:
        """Require at least 20 steps per period of the fastest frequency."""
        if omega_max > 0 and self.dt > 2 * math.pi / omega_max / 20:
            raise DomainError(
                f"dt={self.dt} ns resolves fewer than 20 steps per period of "
                f"omega_max={omega_max:.6g} rad/ns"
            )

    def refined(self, level: int = 1) -> "IntegratorConfig":
        return IntegratorConfig(self.dt / self.refine_factor**level, self.refine_factor,
                                self.convergence_tol)


@dataclass(frozen=True)
class IntegratorStats:
    steps: int
    max_trace_drift: float
    min_eigenvalue: float


def step_count(t0: float, t1: float, dt: float) -> int:
    """Number of RK4 steps on [t0, t1]; the last one is shortened to land on t1."""
    span = t1 - t0
    n = math.ceil(span / dt)
    # avoid a vanishing trailing step from round-off in span / dt
    if n > 0 and span - (n - 1) * dt <= 1e-12 * max(1.0, abs(t1)):
        n -= 1
    return max(n, 0)


def _check_span(t0: float, t1: float) -> None:
    if not t1 >= t0:
        raise DomainError(f"t1={t1} must be >= t0={t0}")


def lindblad_rhs(rho: np.ndarray, h: np.ndarray, c) -> np.ndarray:
    """-i[H, rho] + sum_C (C rho C^+ - C^+C rho / 2 - rho C^+C / 2)."""
    rho = np.asarray(rho)
    h = np.asarray(h)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or h.shape != rho.shape:
        raise DomainError(f"shape mismatch: rho {rho.shape}, H {h.shape}")
    out = -1j * (h @ rho - rho @ h)
    for op in c:
        op = np.asarray(op)
        if op.shape != rho.shape:
            raise DomainError(f"collapse operator shape {op.shape} != {rho.shape}")
        cd = dagger(op)
        cdc = cd @ op
        out += op @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc)
    return out


# compiled kernels ----------------------------------------------------------

@numba.njit(cache=True)
def _master_rhs(t, rho, rows, cols, vals, freqs, s_rows, s_cols, s_vals, x, out):
    # x = -i Heff rho with Heff = H(t) - iK/2; for Hermitian rho the
    # Lindblad generator is x + x^+ + sum_C C rho C^+
    d = rho.shape[0]
    x[:, :] = 0.0
    for k in range(rows.shape[0]):
        v = -1j * vals[k] * np.exp(1j * freqs[k] * t)
        r = rows[k]
        c = cols[k]
        for m in range(d):
            x[r, m] += v * rho[c, m]
    for i in range(d):
        for j in range(d):
            out[i, j] = x[i, j] + np.conj(x[j, i])
    flat_in = rho.reshape(d * d)
    flat_out = out.reshape(d * d)
    for k in range(s_rows.shape[0]):
        flat_out[s_rows[k]] += s_vals[k] * flat_in[s_cols[k]]


@numba.njit(cache=True)
def _axpy(y, a, x, out):
    for i in range(y.shape[0]):
        for j in range(y.shape[1]):
            out[i, j] = y[i, j] + a * x[i, j]


@numba.njit(cache=True)
def _master_rk4(rho, t0, dt, n_steps, t_end, rows, cols, vals, freqs, s_rows, s_cols, s_vals):
    d = rho.shape[0]
    k1 = np.empty((d, d), dtype=np.complex128)
    k2 = np.empty_like(k1)
    k3 = np.empty_like(k1)
    k4 = np.empty_like(k1)
    tmp = np.empty_like(k1)
    x = np.empty_like(k1)
    tr0 = 0.0 + 0.0j
    for m in range(d):
        tr0 += rho[m, m]
    max_drift = 0.0
    for step in range(n_steps):
        t = t0 + step * dt
        h = dt
        if step == n_steps - 1:
            h = t_end - t
        _master_rhs(t, rho, rows, cols, vals, freqs, s_rows, s_cols, s_vals, x, k1)
        _axpy(rho, 0.5 * h, k1, tmp)
        _master_rhs(t + 0.5 * h, tmp, rows, cols, vals, freqs, s_rows, s_cols, s_vals, x, k2)
        _axpy(rho, 0.5 * h, k2, tmp)
        _master_rhs(t + 0.5 * h, tmp, rows, cols, vals, freqs, s_rows, s_cols, s_vals, x, k3)
        _axpy(rho, h, k3, tmp)
        _master_rhs(t + h, tmp, rows, cols, vals, freqs, s_rows, s_cols, s_vals, x, k4)
        tr = 0.0 + 0.0j
        for i in range(d):
            for j in range(d):
                rho[i, j] += (h / 6.0) * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
            tr += rho[i, i]
        drift = abs(tr - tr0)
        if drift > max_drift:
            max_drift = drift
    return max_drift


@numba.njit(cache=True)
def _schrodinger_rhs(t, psi, rows, cols, vals, freqs, out):
    out[:, :] = 0.0
    for k in range(rows.shape[0]):
        v = -1j * vals[k] * np.exp(1j * freqs[k] * t)
        r = rows[k]
        c = cols[k]
        for j in range(psi.shape[1]):
            out[r, j] += v * psi[c, j]


@numba.njit(cache=True)
def _schrodinger_rk4(psi, t0, dt, n_steps, t_end, rows, cols, vals, freqs):
    k1 = np.empty_like(psi)
    k2 = np.empty_like(psi)
    k3 = np.empty_like(psi)
    k4 = np.empty_like(psi)
    tmp = np.empty_like(psi)
    for step in range(n_steps):
        t = t0 + step * dt
        h = dt
        if step == n_steps - 1:
            h = t_end - t
        _schrodinger_rhs(t, psi, rows, cols, vals, freqs, k1)
        _axpy(psi, 0.5 * h, k1, tmp)
        _schrodinger_rhs(t + 0.5 * h, tmp, rows, cols, vals, freqs, k2)
        _axpy(psi, 0.5 * h, k2, tmp)
        _schrodinger_rhs(t + 0.5 * h, tmp, rows, cols, vals, freqs, k3)
        _axpy(psi, h, k3, tmp)
        _schrodinger_rhs(t + h, tmp, rows, cols, vals, freqs, k4)
        for i in range(psi.shape[0]):
            for j in range(psi.shape[1]):
                psi[i, j] += (h / 6.0) * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])


def _jump_superoperator(c, dim):
    """Sparse form of rho -> sum_C C rho C^+ acting on row-major flattened rho."""
    rows, cols, vals = [], [], []
    for op in c:
        r, k = np.nonzero(op)
        v = op[r, k]
        # (C rho C^+)[r_i, r_j] += v_i conj(v_j) rho[k_i, k_j]
        rows.append((r[:, None] * dim + r[None, :]).ravel())
        cols.append((k[:, None] * dim + k[None, :]).ravel())
        vals.append((v[:, None] * v.conj()[None, :]).ravel())
    if not rows:
        return np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, complex)
    rows, cols, vals = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    # merge entries that several operators share
    key, inverse = np.unique(rows * (dim * dim) + cols, return_inverse=True)
    merged = np.zeros(len(key), dtype=complex)
    np.add.at(merged, inverse, vals)
    return (key // (dim * dim)).astype(np.int64), (key % (dim * dim)).astype(np.int64), merged


def _effective_entries(h: HarmonicHamiltonian, c):
    rows, cols, vals, freqs = h.entries()
    k = np.zeros((h.dim, h.dim), dtype=complex)
    for op in c:
        k += dagger(op) @ op
    kr, kc = np.nonzero(k)
    return (np.concatenate([rows, kr]).astype(np.int64),
            np.concatenate([cols, kc]).astype(np.int64),
            np.concatenate([vals, -0.5j * k[kr, kc]]),
            np.concatenate([freqs, np.zeros(len(kr))]))


# public propagators ---------------------------------------------------------

def propagate_master(rho0, h_of_t, c, t0: float, t1: float, cfg: IntegratorConfig):
    """Integrate the master equation from ``t0`` to ``t1``.

    Returns
    -------
    rho : ndarray
        Final density matrix, Hermitized once.
    stats : IntegratorStats
        Step count, largest trace deviation over accepted steps, and the
        smallest eigenvalue of the returned state.

    Raises
    ------
    IntegratorError
        Trace drift above 1e-6 or an eigenvalue below -1e-6.
    """
    _check_span(t0, t1)
    rho = np.array(rho0, dtype=complex, copy=True)
    dim = rho.shape[0]
    if rho.shape != (dim, dim):
        raise DomainError(f"rho0 must be square, got {rho.shape}")
    c = [np.asarray(op, dtype=complex) for op in c]
    for op in c:
        if op.shape != rho.shape:
            raise DomainError(f"collapse operator shape {op.shape} != {rho.shape}")
    n = step_count(t0, t1, cfg.dt)

    if isinstance(h_of_t, HarmonicHamiltonian):
        if h_of_t.dim != dim:
            raise DomainError(f"Hamiltonian dimension {h_of_t.dim} != {dim}")
        rows, cols, vals, freqs = _effective_entries(h_of_t, c)
        s_rows, s_cols, s_vals = _jump_superoperator(c, dim)
        drift = _master_rk4(rho, float(t0), float(cfg.dt), n, float(t1), rows, cols, vals,
                            freqs, s_rows, s_cols, s_vals) if n else 0.0
    else:
        tr0 = np.trace(rho)
        drift = 0.0
        for step in range(n):
            t = t0 + step * cfg.dt
            h = t1 - t if step == n - 1 else cfg.dt
            k1 = lindblad_rhs(rho, h_of_t(t), c)
            k2 = lindblad_rhs(rho + 0.5 * h * k1, h_of_t(t + 0.5 * h), c)
            k3 = lindblad_rhs(rho + 0.5 * h * k2, h_of_t(t + 0.5 * h), c)
            k4 = lindblad_rhs(rho + h * k3, h_of_t(t + h), c)
            rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            drift = max(drift, abs(np.trace(rho) - tr0))

    rho = 0.5 * (rho + dagger(rho))
    lam = min_eigenvalue_hermitian(rho)
    if drift > TRACE_FAIL or lam < POSITIVITY_FAIL:
        raise IntegratorError(
            f"state left the physical set (trace drift {drift:.3e}, min eigenvalue "
            f"{lam:.3e}) with dt={cfg.dt}; use a smaller dt"
        )
    return rho, IntegratorStats(n, float(drift), lam)


def evolve_master(rho0, h_of_t, c, t0: float, t1: float, cfg: IntegratorConfig) -> np.ndarray:
    return propagate_master(rho0, h_of_t, c, t0, t1, cfg)[0]


def evolve_schrodinger(psi0, h_of_t, t0: float, t1: float, cfg: IntegratorConfig) -> np.ndarray:
    """RK4 for d psi/dt = -i H(t) psi, renormalized once at the end.

    ``psi0`` may be a single state or a ``(dim, k)`` array of column states,
    which are then propagated together.
    """
    _check_span(t0, t1)
    psi = np.array(psi0, dtype=complex, copy=True)
    single = psi.ndim == 1
    if single:
        psi = psi[:, None]
    norms0 = np.linalg.norm(psi, axis=0)
    if np.any(np.abs(norms0 - 1) > 1e-10):
        raise DomainError("initial state is not normalized")
    n = step_count(t0, t1, cfg.dt)

    if isinstance(h_of_t, HarmonicHamiltonian):
        if h_of_t.dim != psi.shape[0]:
            raise DomainError(f"Hamiltonian dimension {h_of_t.dim} != {psi.shape[0]}")
        rows, cols, vals, freqs = h_of_t.entries()
        psi = np.ascontiguousarray(psi)
        if n:
            _schrodinger_rk4(psi, float(t0), float(cfg.dt), n, float(t1), rows, cols, vals, freqs)
    else:
        for step in range(n):
            t = t0 + step * cfg.dt
            h = t1 - t if step == n - 1 else cfg.dt
            k1 = -1j * h_of_t(t) @ psi
            k2 = -1j * h_of_t(t + 0.5 * h) @ (psi + 0.5 * h * k1)
            k3 = -1j * h_of_t(t + 0.5 * h) @ (psi + 0.5 * h * k2)
            k4 = -1j * h_of_t(t + h) @ (psi + h * k3)
            psi = psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    norms = np.linalg.norm(psi, axis=0)
    drift = float(np.max(np.abs(norms - 1)))
    if drift > NORM_FAIL:
        raise IntegratorError(f"norm drift {drift:.3e} with dt={cfg.dt}; use a smaller dt")
    psi = psi / norms
    return psi[:, 0] if single else psi


def unitary_expm(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t) of a Hermitian matrix via its eigendecomposition."""
    if not is_hermitian(h):
        raise DomainError("Hamiltonian is not Hermitian")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ dagger(v)


# closed forms ---------------------------------------------------------------

def _stage1_span(layout: SpaceLayout):
    idx = layout.index
    return {
        "g00g": idx(G, 0, 0, G),
        "e": (idx(E, 0, 0, G), idx(G, 1, 0, G), idx(G, 0, 0, E)),
        "f": (idx(F, 0, 0, G), idx(G, 0, 1, G), idx(G, 0, 0, F)),
    }


def closed_form_stage1(psi0, g: float, t: float, layout: SpaceLayout) -> np.ndarray:
    """Analytic swap dynamics with symmetric couplings g_eg = g_fg = g.

    Supported on |g00g> and the two single-excitation ladders
    (|e00g>, |g10g>, |g00e>) and (|f00g>, |g01g>, |g00f>), each of which
    evolves independently with frequency sqrt(2) g.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (layout.total_dim,):
        raise DomainError(f"state dimension {psi0.shape} != ({layout.total_dim},)")
    span = _stage1_span(layout)
    support = [span["g00g"], *span["e"], *span["f"]]
    outside = np.delete(psi0, support)
    if np.any(np.abs(outside) > 1e-12):
        raise DomainError("state has weight outside the single-excitation swap span")

    x = math.sqrt(2) * g * t
    c, s = math.cos(x), math.sin(x)
    # amplitudes in the ladder basis (qutrit 1 excited, one photon, qutrit 2 excited)
    u = np.array([
        [(1 + c) / 2, -1j * s / math.sqrt(2), -(1 - c) / 2],
        [-1j * s / math.sqrt(2), c, -1j * s / math.sqrt(2)],
        [-(1 - c) / 2, -1j * s / math.sqrt(2), (1 + c) / 2],
    ])
    out = np.zeros_like(psi0)
    out[span["g00g"]] = psi0[span["g00g"]]
    for key in ("e", "f"):
        ix = list(span[key])
        out[ix] = u @ psi0[ix]
    return out


def closed_form_stage2(psi0, Omega: float, t: float, layout: SpaceLayout | None = None) -> np.ndarray:
    """Rotation |e>_2 -> cos|e> - i sin|f>, |f>_2 -> cos|f> - i sin|e> on qutrit 2."""
    psi0 = np.asarray(psi0, dtype=complex)
    if layout is None:
        n_levels = math.isqrt(psi0.shape[0] // 9)
        layout = SpaceLayout(n_levels - 1)
    if psi0.shape != (layout.total_dim,):
        raise DomainError(f"state dimension {psi0.shape} != ({layout.total_dim},)")
    c, s = math.cos(Omega * t), math.sin(Omega * t)
    rot = np.array([[1, 0, 0], [0, c, -1j * s], [0, -1j * s, c]])
    # qutrit 2 is the fastest-varying Kronecker factor
    blocks = psi0.reshape(-1, 3)
    return (blocks @ rot.T).reshape(-1)
