"""Dense complex linear algebra with basis bookkeeping.

Everything in the package lives on small (<= 8 dimensional) labeled Hilbert
spaces, so operators are stored as plain dense complex matrices.  Values are
immutable after construction and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DimError, InvalidOperator, LabelError

__all__ = [
    "Operator",
    "StateVector",
    "DensityMatrix",
    "tensor_product",
    "matexp",
    "projector",
    "dagger",
    "commutator",
    "trace",
    "fro_norm",
    "hermitian_defect",
    "is_hermitian",
]


def _default_labels(dim: int) -> tuple[str, ...]:
    return tuple(str(j) for j in range(dim))


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Operator:
    """Dense complex square matrix on a labeled basis."""

    entries: np.ndarray
    basis_labels: tuple[str, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        entries = _freeze(self.entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimError(f"operator entries must be square, got {entries.shape}")
        labels = self.basis_labels or _default_labels(entries.shape[0])
        if len(labels) != entries.shape[0]:
            raise DimError("basis_labels length does not match dimension")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "basis_labels", tuple(labels))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, dim: int, labels=None) -> "Operator":
        return cls(np.eye(dim, dtype=complex), labels)

    def __matmul__(self, other: "Operator") -> "Operator":
        if self.dim != other.dim:
            raise DimError("dimension mismatch in operator product")
        return Operator(self.entries @ other.entries, self.basis_labels)

    def index(self, label: str) -> int:
        try:
            return self.basis_labels.index(label)
        except ValueError:
            raise LabelError(f"unknown basis label {label!r}") from None


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitude vector on a labeled basis."""

    amplitudes: np.ndarray
    basis_labels: tuple[str, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        norm = np.linalg.norm(amps)
        if norm == 0 or not np.isfinite(norm):
            raise InvalidOperator("state vector has zero or non-finite norm")
        amps = amps / norm
        amps.setflags(write=False)
        labels = self.basis_labels or _default_labels(amps.size)
        if len(labels) != amps.size:
            raise DimError("basis_labels length does not match dimension")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "basis_labels", tuple(labels))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def basis(cls, label: str, labels) -> "StateVector":
        labels = tuple(labels)
        if label not in labels:
            raise LabelError(f"unknown basis label {label!r}")
        amps = np.zeros(len(labels), dtype=complex)
        amps[labels.index(label)] = 1.0
        return cls(amps, labels)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.basis_labels)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix (validated on demand)."""

    entries: np.ndarray
    basis_labels: tuple[str, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        entries = _freeze(self.entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimError(f"density matrix must be square, got {entries.shape}")
        labels = self.basis_labels or _default_labels(entries.shape[0])
        if len(labels) != entries.shape[0]:
            raise DimError("basis_labels length does not match dimension")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "basis_labels", tuple(labels))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def validate(self, herm_tol=1e-10, trace_tol=1e-8, eig_tol=-1e-8) -> None:
        m = self.entries
        if np.max(np.abs(m - m.conj().T)) > herm_tol * max(1.0, np.max(np.abs(m))):
            raise InvalidOperator("density matrix is not Hermitian within tolerance")
        if abs(np.trace(m).real - 1.0) > trace_tol:
            raise InvalidOperator("density matrix trace differs from 1")
        if np.linalg.eigvalsh((m + m.conj().T) / 2).min() < eig_tol:
            raise InvalidOperator("density matrix has a significantly negative eigenvalue")


def _entries(op) -> np.ndarray:
    return op.entries if isinstance(op, (Operator, DensityMatrix)) else np.asarray(op, dtype=complex)


def tensor_product(a: Operator, b: Operator) -> Operator:
    """Kronecker product with concatenated labels; the first factor varies slowest."""
    labels = tuple(la + lb for la in a.basis_labels for lb in b.basis_labels)
    return Operator(np.kron(a.entries, b.entries), labels)


def is_hermitian(op, rel_tol: float = 1e-12) -> bool:
    m = _entries(op)
    scale = np.max(np.abs(m))
    if scale == 0:
        return True
    return np.max(np.abs(m - m.conj().T)) < rel_tol * scale


def hermitian_defect(op) -> float:
    m = _entries(op)
    return float(np.max(np.abs(m - m.conj().T)))


def matexp(h, s: complex = 1.0) -> Operator:
    """exp(s*h); Hermitian matrices go through an eigendecomposition,
    everything else through scaling-and-squaring."""
    labels = h.basis_labels if isinstance(h, Operator) else None
    m = _entries(h)
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise InvalidOperator("matexp argument has non-finite entries")
    if is_hermitian(m):
        w, v = np.linalg.eigh(m)
        out = (v * np.exp(s * w)) @ v.conj().T
    else:
        out = scipy.linalg.expm(s * m)
    return Operator(out, labels)


def projector(labels, dim_or_labels) -> Operator:
    """Diagonal 0/1 operator selecting the given computational labels."""
    if isinstance(dim_or_labels, int):
        all_labels = _default_labels(dim_or_labels)
    else:
        all_labels = tuple(dim_or_labels)
    wanted = {str(l) for l in labels}
    unknown = wanted - set(all_labels)
    if unknown:
        raise LabelError(f"unknown basis labels {sorted(unknown)}")
    diag = np.array([1.0 if l in wanted else 0.0 for l in all_labels], dtype=complex)
    return Operator(np.diag(diag), all_labels)


def dagger(op: Operator) -> Operator:
    labels = op.basis_labels if isinstance(op, Operator) else None
    return Operator(_entries(op).conj().T, labels)


def commutator(a, b) -> Operator:
    ma, mb = _entries(a), _entries(b)
    if ma.shape != mb.shape:
        raise DimError("dimension mismatch in commutator")
    labels = a.basis_labels if isinstance(a, Operator) else None
    return Operator(ma @ mb - mb @ ma, labels)


def trace(op) -> complex:
    return complex(np.trace(_entries(op)))


def fro_norm(op) -> float:
    return float(np.linalg.norm(_entries(op), "fro"))
