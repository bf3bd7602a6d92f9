import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leakctl.errors import DimError, InvalidOperator, LabelError
from leakctl.operators import (
    DensityMatrix,
    Operator,
    StateVector,
    commutator,
    dagger,
    fro_norm,
    hermitian_defect,
    is_hermitian,
    matexp,
    projector,
    tensor_product,
    trace,
)


def random_hermitian(dim, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (m + m.conj().T) / 2


class TestOperator:
    def test_identity_and_labels(self):
        op = Operator.identity(3, ("0", "1", "2"))
        assert op.dim == 3
        assert op.index("2") == 2
        with pytest.raises(LabelError):
            op.index("3")

    def test_default_labels(self):
        assert Operator(np.eye(2)).basis_labels == ("0", "1")

    def test_rejects_non_square(self):
        with pytest.raises(DimError):
            Operator(np.zeros((2, 3)))

    def test_rejects_label_mismatch(self):
        with pytest.raises(DimError):
            Operator(np.eye(2), ("0", "1", "2"))

    def test_matmul_dim_mismatch(self):
        with pytest.raises(DimError):
            Operator(np.eye(2)) @ Operator(np.eye(3))

    def test_entries_frozen(self):
        op = Operator(np.eye(2))
        with pytest.raises(ValueError):
            op.entries[0, 0] = 5.0


class TestStateVector:
    def test_normalizes(self):
        v = StateVector([3.0, 4.0])
        assert np.linalg.norm(v.amplitudes) == pytest.approx(1.0)

    def test_zero_norm_rejected(self):
        with pytest.raises(InvalidOperator):
            StateVector([0.0, 0.0])

    def test_basis(self):
        v = StateVector.basis("1", ("0", "1", "2"))
        assert v.amplitudes[1] == 1.0
        with pytest.raises(LabelError):
            StateVector.basis("x", ("0", "1"))

    def test_density(self):
        rho = StateVector([1.0, 1.0]).density()
        rho.validate()
        assert rho.entries[0, 1] == pytest.approx(0.5)


class TestDensityMatrix:
    def test_validate_good(self):
        DensityMatrix(np.diag([0.5, 0.5])).validate()

    def test_validate_bad_trace(self):
        with pytest.raises(InvalidOperator):
            DensityMatrix(np.diag([0.9, 0.9])).validate()

    def test_validate_not_hermitian(self):
        m = np.array([[0.5, 0.5], [0.0, 0.5]], dtype=complex)
        with pytest.raises(InvalidOperator):
            DensityMatrix(m).validate()

    def test_validate_negative_eigenvalue(self):
        with pytest.raises(InvalidOperator):
            DensityMatrix(np.diag([1.5, -0.5])).validate()


def test_tensor_product_dims():
    a = Operator(np.eye(2), ("g", "e"))
    b = Operator(np.eye(3))
    assert tensor_product(a, b).dim == 6


@given(st.integers(0, 1000))
@settings(max_examples=25, deadline=None)
def test_matexp_of_hermitian_is_unitary(seed):
    h = random_hermitian(3, seed)
    u = matexp(h, -1j).entries
    assert np.allclose(u.conj().T @ u, np.eye(3), atol=1e-12)


def test_matexp_matches_series_for_nilpotent():
    n = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    assert np.allclose(matexp(n).entries, np.eye(2) + n)


def test_is_hermitian_and_defect():
    h = random_hermitian(3, 7)
    assert is_hermitian(h)
    assert hermitian_defect(h) < 1e-14
    h2 = h.copy()
    h2[0, 1] += 1.0
    assert not is_hermitian(h2)


def test_projector():
    p = projector(("0", "1"), ("0", "1", "2")).entries
    assert np.allclose(p, np.diag([1.0, 1.0, 0.0]))


def test_dagger_trace_norm():
    m = np.array([[1.0, 2j], [0.0, 3.0]], dtype=complex)
    op = Operator(m)
    assert np.allclose(dagger(op).entries, m.conj().T)
    assert trace(op) == pytest.approx(4.0)
    assert fro_norm(op) == pytest.approx(np.linalg.norm(m, "fro"))


@given(st.integers(0, 1000))
@settings(max_examples=25, deadline=None)
def test_commutator_antisymmetry(seed):
    a, b = random_hermitian(3, seed), random_hermitian(3, seed + 1)
    ab = commutator(a, b).entries
    ba = commutator(b, a).entries
    assert np.allclose(ab, -ba, atol=1e-12)
