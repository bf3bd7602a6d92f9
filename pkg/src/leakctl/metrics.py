"""Fidelity and population measures.

The gate-fidelity trace formula takes the modulus by default, which removes
global-phase sensitivity; pass ``use_modulus=False`` for the real-part variant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimError
from .models import OffsetSet
from .operators import DensityMatrix, Operator, StateVector

__all__ = [
    "FidelityReport",
    "Channel",
    "trace_gate_fidelity",
    "averaged_fidelity_1q",
    "averaged_fidelity_1q_unitary",
    "averaged_fidelity_2q",
    "state_fidelity",
    "populations",
    "leakage_population",
    "iswap_ideal",
]


@dataclass
class FidelityReport:
    value: float
    kind: str  # trace-gate | averaged-1q | averaged-2q | state
    leakage_pop: float = 0.0
    offsets: OffsetSet = field(default_factory=OffsetSet)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (-1e-9 <= self.value <= 1.0 + 1e-9):
            raise ValueError(f"fidelity {self.value} outside [0, 1]")
        if self.leakage_pop < -1e-9:
            raise ValueError(f"negative leakage population {self.leakage_pop}")


def _mat(x):
    if isinstance(x, (Operator, DensityMatrix)):
        return np.asarray(x.entries)
    return np.asarray(x, dtype=complex)


def _vec(x):
    if isinstance(x, StateVector):
        return np.asarray(x.amplitudes)
    return np.asarray(x, dtype=complex).ravel()


class Channel:
    """Linear map on density matrices, stored as evolved basis matrices.

    ``basis_images[j*d+k]`` is the image of |j><k|, so applying the channel to
    an arbitrary input is a single tensor contraction.
    """

    def __init__(self, basis_images: np.ndarray):
        images = np.asarray(basis_images, dtype=complex)
        d = images.shape[-1]
        if images.shape != (d * d, d, d):
            raise DimError(f"expected (d^2, d, d) basis images, got {images.shape}")
        self.dim = d
        self.basis_images = images

    @classmethod
    def from_unitary(cls, u) -> "Channel":
        u = _mat(u)
        d = u.shape[0]
        basis = np.zeros((d * d, d, d), dtype=complex)
        for j in range(d):
            for k in range(d):
                basis[j * d + k] = np.outer(u[:, j], u[:, k].conj())
        return cls(basis)

    @classmethod
    def from_evolver(cls, evolve, dim: int) -> "Channel":
        """Build by evolving the d^2 matrix units; ``evolve`` maps a stacked
        (d^2, d, d) array of inputs to the stacked outputs."""
        basis = np.zeros((dim * dim, dim, dim), dtype=complex)
        for j in range(dim):
            for k in range(dim):
                basis[j * dim + k, j, k] = 1.0
        return cls(np.asarray(evolve(basis), dtype=complex))

    def apply(self, rho0) -> np.ndarray:
        rho0 = _mat(rho0)
        return np.einsum("jk,jkab->ab", rho0, self.basis_images.reshape(self.dim, self.dim, self.dim, self.dim))

    def apply_many(self, rhos: np.ndarray) -> np.ndarray:
        rhos = np.asarray(rhos, dtype=complex)
        return np.einsum("njk,jkab->nab", rhos, self.basis_images.reshape(self.dim, self.dim, self.dim, self.dim))


def trace_gate_fidelity(u_final, u_ideal, comp_idx, use_modulus: bool = True) -> float:
    """|Tr(P U_f P U0^dag)| / K on the computational block."""
    uf = _mat(u_final)
    u0 = _mat(u_ideal)
    comp_idx = list(comp_idx)
    k = len(comp_idx)
    if u0.shape != (k, k):
        raise DimError(f"ideal gate must be {k}x{k}, got {u0.shape}")
    block = uf[np.ix_(comp_idx, comp_idx)]
    val = np.trace(block @ u0.conj().T) / k
    return float(abs(val)) if use_modulus else float(val.real)


def _embedded_states_1q(thetas, dim: int, comp_idx) -> np.ndarray:
    states = np.zeros((thetas.size, dim), dtype=complex)
    states[:, comp_idx[0]] = np.cos(thetas)
    states[:, comp_idx[1]] = np.sin(thetas)
    return states


def averaged_fidelity_1q(channel: Channel, u_ideal, n: int = 1001, comp_idx=(0, 1)) -> float:
    """Trapezoidal average of <U0 phi| E(|phi><phi|) |U0 phi> over the
    real-amplitude input family cos(theta)|0> + sin(theta)|1>, theta in [0, 2pi]."""
    if n < 3:
        raise ValueError("need at least 3 sample states")
    u0 = _mat(u_ideal)
    thetas = np.linspace(0.0, 2.0 * np.pi, n)
    comp_idx = list(comp_idx)
    states = _embedded_states_1q(thetas, channel.dim, comp_idx)
    rhos = np.einsum("na,nb->nab", states, states.conj())
    finals = channel.apply_many(rhos)
    ideal_small = np.stack([np.cos(thetas), np.sin(thetas)]) # (2, n)
    ideal_small = (u0 @ ideal_small).T  # (n, 2)
    ideal = np.zeros((n, channel.dim), dtype=complex)
    ideal[:, comp_idx] = ideal_small
    vals = np.einsum("na,nab,nb->n", ideal.conj(), finals, ideal).real
    return float(np.trapezoid(vals, thetas) / (2.0 * np.pi))


def averaged_fidelity_1q_unitary(u_final, u_ideal, comp_idx=(0, 1)) -> float:
    """Closed form of the same average for a purely unitary channel.

    With M the 2x2 computational block of U0^dag U_f, the harmonic expansion
    of |<phi|M|phi>|^2 integrates to |c|^2 + (|d|^2 + |s|^2)/2 where
    c=(m00+m11)/2, d=(m00-m11)/2, s=(m01+m10)/2.
    """
    uf = _mat(u_final)
    u0 = _mat(u_ideal)
    comp_idx = list(comp_idx)
    m = u0.conj().T @ uf[np.ix_(comp_idx, comp_idx)]
    c = (m[0, 0] + m[1, 1]) / 2.0
    d = (m[0, 0] - m[1, 1]) / 2.0
    s = (m[0, 1] + m[1, 0]) / 2.0
    return float(abs(c) ** 2 + (abs(d) ** 2 + abs(s) ** 2) / 2.0)


def iswap_ideal() -> np.ndarray:
    """Ideal iSWAP on the computational order (00, 01, 10, 11)."""
    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = 1.0
    u[3, 3] = 1.0
    u[2, 1] = 1j
    u[1, 2] = 1j
    return u


def averaged_fidelity_2q(channel: Channel, u_ideal, n_grid: int = 33, comp_idx=(0, 1, 2, 4)) -> float:
    """2D trapezoidal average over product states
    (cos a|0>+sin a|1>) x (cos b|0>+sin b|1|)."""
    if n_grid < 11:
        raise ValueError("need at least 11 grid points per axis")
    u0 = _mat(u_ideal)
    comp_idx = list(comp_idx)
    angles = np.linspace(0.0, 2.0 * np.pi, n_grid)
    ca, sa = np.cos(angles), np.sin(angles)
    # product amplitudes on (00, 01, 10, 11), outer over the two angles
    amp = np.zeros((n_grid, n_grid, 4))
    amp[:, :, 0] = np.outer(ca, ca)
    amp[:, :, 1] = np.outer(ca, sa)
    amp[:, :, 2] = np.outer(sa, ca)
    amp[:, :, 3] = np.outer(sa, sa)
    amp = amp.reshape(-1, 4)
    states = np.zeros((amp.shape[0], channel.dim), dtype=complex)
    states[:, comp_idx] = amp
    rhos = np.einsum("na,nb->nab", states, states.conj())
    finals = channel.apply_many(rhos)
    ideal = np.zeros((amp.shape[0], channel.dim), dtype=complex)
    ideal[:, comp_idx] = amp @ u0.T
    vals = np.einsum("na,nab,nb->n", ideal.conj(), finals, ideal).real.reshape(n_grid, n_grid)
    inner = np.trapezoid(vals, angles, axis=1)
    return float(np.trapezoid(inner, angles) / (2.0 * np.pi) ** 2)


def state_fidelity(rho, psi) -> float:
    """<psi|rho|psi>, clipped to [0, 1]."""
    r = _mat(rho)
    v = _vec(psi)
    if r.shape[0] != v.size:
        raise DimError("state and density matrix dimensions differ")
    val = float((v.conj() @ r @ v).real)
    return min(max(val, 0.0), 1.0)


def populations(state, labels=None) -> dict:
    """Diagonal populations keyed by basis label."""
    if isinstance(state, StateVector):
        diag = np.abs(state.amplitudes) ** 2
        labels = labels or state.basis_labels
    elif isinstance(state, DensityMatrix):
        diag = np.diag(state.entries).real
        labels = labels or state.basis_labels
    else:
        arr = np.asarray(state, dtype=complex)
        diag = np.abs(arr) ** 2 if arr.ndim == 1 else np.diag(arr).real
        labels = labels or tuple(str(j) for j in range(diag.size))
    return {str(l): float(p) for l, p in zip(labels, diag)}


def leakage_population(state, comp_labels, labels=None) -> float:
    """1 minus the total computational population, clipped at 0."""
    pops = populations(state, labels)
    comp = sum(pops[str(l)] for l in comp_labels)
    return max(0.0, 1.0 - comp)
