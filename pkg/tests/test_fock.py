"""
절단 Fock 공간 연산자 테스트
"""

import numpy as np
import pytest

from app.core.exceptions import InvalidSpaceError, LevelIndexError, ShapeMismatchError
from app.models.fock import (
    DensityMatrix,
    FockSpace,
    Operator,
    annihilation,
    creation,
    dissipator,
    embed,
    identity,
    number,
    partial_trace,
    projector_transfer,
    tensor,
)


def random_density(dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho)


class TestFockSpace:
    @pytest.mark.parametrize("dim", [0, 1, -3])
    def test_rejects_small_dimension(self, dim):
        with pytest.raises(InvalidSpaceError):
            FockSpace(dim)

    def test_accepts_two_levels(self):
        assert FockSpace(2).dim == 2


class TestLadderOperators:
    def test_annihilation_elements(self):
        c = annihilation(FockSpace(6)).matrix
        for n in range(1, 6):
            assert c[n - 1, n] == pytest.approx(np.sqrt(n))
        assert np.count_nonzero(c) == 5

    def test_creation_is_adjoint(self):
        space = FockSpace(5)
        np.testing.assert_array_equal(creation(space).matrix, annihilation(space).matrix.conj().T)

    def test_number_operator(self):
        space = FockSpace(7)
        c = annihilation(space)
        np.testing.assert_allclose((c.dag() @ c).matrix, number(space).matrix, atol=1e-14)

    def test_commutator_below_cutoff(self):
        space = FockSpace(8)
        c = annihilation(space)
        commutator = (c @ c.dag() - c.dag() @ c).matrix
        # 마지막 준위에서만 절단 효과가 나타남
        np.testing.assert_allclose(np.diag(commutator)[:-1], np.ones(7), atol=1e-14)
        assert commutator[-1, -1].real == pytest.approx(-7.0)

    def test_operator_matrix_is_read_only(self):
        op = number(FockSpace(3))
        with pytest.raises(ValueError):
            op.matrix[0, 0] = 1.0

    def test_caller_array_stays_writable(self):
        array = np.eye(2)
        Operator(array, (2,))
        array[0, 0] = 5.0
        assert array[0, 0] == 5.0

    def test_dimension_metadata_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            Operator(np.eye(4), (3,))


class TestProjector:
    def test_selective_annihilation(self):
        space = FockSpace(4)
        c_j = projector_transfer(space, 1, 2).matrix
        assert c_j[1, 2] == 1.0
        assert np.count_nonzero(c_j) == 1

    @pytest.mark.parametrize("j,k", [(3, 4), (-1, 0), (0, 4)])
    def test_out_of_range(self, j, k):
        with pytest.raises(LevelIndexError):
            projector_transfer(FockSpace(4), j, k)

    def test_level_error_is_index_error(self):
        with pytest.raises(IndexError):
            projector_transfer(FockSpace(3), 0, 3)


class TestTensor:
    def test_kron_and_dims(self):
        a = annihilation(FockSpace(2))
        c = annihilation(FockSpace(3))
        product = tensor(a, c)
        assert product.dims == (2, 3)
        np.testing.assert_array_equal(product.matrix, np.kron(a.matrix, c.matrix))

    def test_embed_places_operator(self):
        spaces = (FockSpace(2), FockSpace(2), FockSpace(4))
        c = embed(annihilation(spaces[2]), spaces, 2)
        assert c.dims == (2, 2, 4)
        np.testing.assert_array_equal(c.matrix, np.kron(np.eye(4), annihilation(spaces[2]).matrix))

    def test_mismatched_spaces(self):
        with pytest.raises(ShapeMismatchError):
            number(FockSpace(3)) @ number(FockSpace(4))

    @pytest.mark.parametrize("seed", [0, 1])
    def test_mixed_product(self, seed):
        rng = np.random.default_rng(seed)
        a = Operator(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)), (3,))
        b = Operator(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)), (4,))
        left = tensor(a, identity(FockSpace(4)))
        right = tensor(identity(FockSpace(3)), b)
        np.testing.assert_allclose((left @ right).matrix, tensor(a, b).matrix, atol=1e-12)
        np.testing.assert_allclose((right @ left).matrix, tensor(a, b).matrix, atol=1e-12)

    def test_associative(self):
        rng = np.random.default_rng(7)
        a, b, c = (Operator(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)), (d,)) for d in (2, 3, 2))
        grouped_left = tensor(tensor(a, b), c)
        grouped_right = tensor(a, tensor(b, c))
        assert grouped_left.dims == grouped_right.dims == (2, 3, 2)
        np.testing.assert_allclose(grouped_left.matrix, grouped_right.matrix, atol=1e-12)
        np.testing.assert_allclose(grouped_left.matrix, tensor(a, b, c).matrix, atol=1e-12)


class TestDissipator:
    def test_single_decay(self):
        space = FockSpace(3)
        rho = DensityMatrix.fock(space, 1)
        result = dissipator(annihilation(space), rho)
        expected = np.zeros((3, 3))
        expected[0, 0] = 2.0
        expected[1, 1] = -2.0
        np.testing.assert_allclose(result, expected, atol=1e-14)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_traceless(self, seed):
        space = FockSpace(5)
        rho = random_density(5, seed)
        for op in (annihilation(space), creation(space), projector_transfer(space, 2, 3)):
            assert abs(np.trace(dissipator(op, rho))) < 1e-13

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            dissipator(annihilation(FockSpace(3)), np.eye(4) / 4)


class TestPartialTrace:
    def test_product_state(self):
        rho_a = random_density(2, 3)
        rho_c = random_density(4, 4)
        joint = np.kron(rho_a, rho_c)
        np.testing.assert_allclose(partial_trace(joint, (2, 4), keep=0), rho_a, atol=1e-14)
        np.testing.assert_allclose(partial_trace(joint, (2, 4), keep=1), rho_c, atol=1e-14)

    def test_three_factors(self):
        parts = [random_density(d, s) for d, s in ((2, 5), (2, 6), (3, 7))]
        joint = np.kron(np.kron(parts[0], parts[1]), parts[2])
        for keep, part in enumerate(parts):
            np.testing.assert_allclose(partial_trace(joint, (2, 2, 3), keep=keep), part, atol=1e-14)


class TestDensityMatrix:
    def test_valid_state(self):
        rho = DensityMatrix(random_density(4, 8), (4,))
        assert rho.dim == 4
        assert rho.populations.sum() == pytest.approx(1.0)

    def test_rejects_non_hermitian(self):
        matrix = np.array([[0.5, 0.1], [0.0, 0.5]])
        with pytest.raises(ShapeMismatchError):
            DensityMatrix(matrix, (2,))

    def test_rejects_bad_trace(self):
        with pytest.raises(ShapeMismatchError):
            DensityMatrix(np.diag([0.5, 0.6]), (2,))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(ShapeMismatchError):
            DensityMatrix(np.diag([1.5, -0.5]), (2,))

    def test_from_populations(self):
        rho = DensityMatrix.from_populations([0.25, 0.75])
        np.testing.assert_allclose(rho.populations, [0.25, 0.75])
        assert rho.dims == (2,)

    def test_fock_state(self):
        rho = DensityMatrix.fock(FockSpace(4), 2)
        np.testing.assert_array_equal(rho.populations, [0, 0, 1, 0])
        np.testing.assert_array_equal(identity(FockSpace(4)).matrix @ rho.matrix, rho.matrix)
