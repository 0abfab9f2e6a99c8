"""
절단된 Fock 공간 연산자 모듈
사다리 연산자, 텐서곱, 소산자 등 모든 모델 빌더의 기반이 되는 기본 연산을 제공합니다.
"""

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence, Tuple, Union

import numpy as np

from app.core.exceptions import InvalidSpaceError, LevelIndexError, ShapeMismatchError

HERMITIAN_TOL = 1e-12
STATE_HERMITIAN_TOL = 1e-10
STATE_TRACE_TOL = 1e-10
STATE_PSD_TOL = 1e-8


@dataclass(frozen=True)
class FockSpace:
    """준위 |0⟩…|dim−1⟩ 를 가지는 절단 Fock 공간"""

    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise InvalidSpaceError(f"Fock 공간 차원은 2 이상이어야 합니다: dim={self.dim}")


@dataclass(frozen=True, eq=False)
class Operator:
    """
    (텐서곱) 절단 Fock 공간 위의 복소 정사각 행렬

    dims는 구성 공간들의 차원이며, 행렬 크기는 그 곱과 같습니다.
    기저 순서는 a ⊗ b ⊗ c (앞쪽 인자가 가장 느린 인덱스) 입니다.
    """

    matrix: np.ndarray
    dims: Tuple[int, ...]
    hermitian: bool = False

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ShapeMismatchError(f"연산자 행렬은 정사각이어야 합니다: shape={matrix.shape}")
        if int(np.prod(self.dims)) != matrix.shape[0]:
            raise ShapeMismatchError(
                f"차원 메타데이터 {self.dims} 와 행렬 크기 {matrix.shape[0]} 가 일치하지 않습니다"
            )
        if self.hermitian and not np.allclose(matrix, matrix.conj().T, rtol=0, atol=HERMITIAN_TOL):
            raise ShapeMismatchError("에르미트로 표시된 연산자가 M = M† 를 만족하지 않습니다")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.dims, self.hermitian)

    def _check_same_space(self, other: "Operator"):
        if self.dims != other.dims:
            raise ShapeMismatchError(f"서로 다른 공간의 연산자입니다: {self.dims} vs {other.dims}")

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check_same_space(other)
        return Operator(self.matrix @ other.matrix, self.dims)

    def __add__(self, other: "Operator") -> "Operator":
        self._check_same_space(other)
        return Operator(self.matrix + other.matrix, self.dims)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check_same_space(other)
        return Operator(self.matrix - other.matrix, self.dims)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.matrix * scalar, self.dims)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """밀도 행렬 (에르미트, 대각합 1, 수치적 양의 준정부호)"""

    matrix: np.ndarray
    dims: Tuple[int, ...]
    hermitian_tol: float = field(default=STATE_HERMITIAN_TOL, repr=False)
    trace_tol: float = field(default=STATE_TRACE_TOL, repr=False)

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ShapeMismatchError(f"밀도 행렬은 정사각이어야 합니다: shape={matrix.shape}")
        if int(np.prod(self.dims)) != matrix.shape[0]:
            raise ShapeMismatchError(
                f"차원 메타데이터 {self.dims} 와 행렬 크기 {matrix.shape[0]} 가 일치하지 않습니다"
            )
        if not np.allclose(matrix, matrix.conj().T, rtol=0, atol=self.hermitian_tol):
            raise ShapeMismatchError("밀도 행렬이 에르미트가 아닙니다")
        trace = np.trace(matrix).real
        if abs(trace - 1.0) > self.trace_tol:
            raise ShapeMismatchError(f"밀도 행렬 대각합이 1이 아닙니다: Tr ρ = {trace!r}")
        smallest = np.linalg.eigvalsh(0.5 * (matrix + matrix.conj().T)).min()
        if smallest < -STATE_PSD_TOL:
            raise ShapeMismatchError(f"밀도 행렬이 양의 준정부호가 아닙니다: λ_min = {smallest!r}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def populations(self) -> np.ndarray:
        return self.matrix.diagonal().real.copy()

    @classmethod
    def from_populations(cls, populations: Sequence[float]) -> "DensityMatrix":
        """Fock 대각 상태"""
        populations = np.asarray(populations, dtype=float)
        return cls(np.diag(populations), (populations.size,))

    @classmethod
    def fock(cls, space: FockSpace, level: int) -> "DensityMatrix":
        """순수 Fock 상태 |n⟩⟨n|"""
        return cls(projector_transfer(space, level, level).matrix, (space.dim,))


def annihilation(space: FockSpace) -> Operator:
    """소멸 연산자: ⟨n−1|c|n⟩ = √n"""
    matrix = np.diag(np.sqrt(np.arange(1, space.dim, dtype=float)), k=1)
    return Operator(matrix, (space.dim,))


def creation(space: FockSpace) -> Operator:
    return annihilation(space).dag()


def number(space: FockSpace) -> Operator:
    """수 연산자 c†c"""
    return Operator(np.diag(np.arange(space.dim, dtype=float)), (space.dim,), hermitian=True)


def identity(space: FockSpace) -> Operator:
    return Operator(np.eye(space.dim), (space.dim,), hermitian=True)


def projector_transfer(space: FockSpace, j: int, k: int) -> Operator:
    """전이 연산자 |j⟩⟨k| (선택적 소멸 연산자 c_j = |j⟩⟨j+1| 포함)"""
    for level in (j, k):
        if not 0 <= level < space.dim:
            raise LevelIndexError(f"준위 {level} 이(가) 공간 범위 [0, {space.dim}) 밖입니다")
    matrix = np.zeros((space.dim, space.dim))
    matrix[j, k] = 1.0
    return Operator(matrix, (space.dim,), hermitian=(j == k))


def tensor(*operators: Operator) -> Operator:
    """크로네커 곱 A ⊗ B ⊗ …"""
    if not operators:
        raise ShapeMismatchError("텐서곱에는 최소 하나의 연산자가 필요합니다")
    matrix = reduce(np.kron, (op.matrix for op in operators))
    dims = sum((op.dims for op in operators), ())
    hermitian = all(op.hermitian for op in operators)
    return Operator(matrix, dims, hermitian=hermitian)


def embed(op: Operator, spaces: Sequence[FockSpace], position: int) -> Operator:
    """단일 모드 연산자를 곱공간의 position 번째 인자에 배치"""
    factors = [identity(space) for space in spaces]
    factors[position] = op
    return tensor(*factors)


def dissipator(op: Operator, rho: Union[DensityMatrix, np.ndarray]) -> np.ndarray:
    """Lindblad 소산자 D(O)ρ = 2OρO† − ρO†O − O†Oρ"""
    rho_matrix = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if rho_matrix.shape != op.matrix.shape:
        raise ShapeMismatchError(
            f"연산자 {op.matrix.shape} 와 밀도 행렬 {rho_matrix.shape} 의 크기가 다릅니다"
        )
    o = op.matrix
    o_dag = o.conj().T
    o_dag_o = o_dag @ o
    return 2.0 * o @ rho_matrix @ o_dag - rho_matrix @ o_dag_o - o_dag_o @ rho_matrix


def partial_trace(matrix: np.ndarray, dims: Sequence[int], keep: int) -> np.ndarray:
    """keep 번째 인자만 남기고 나머지 부분계를 대각합으로 제거"""
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    tensor_form = np.asarray(matrix).reshape(dims + dims)
    row_axes = list(range(n))
    for axis in sorted((a for a in row_axes if a != keep), reverse=True):
        tensor_form = np.trace(tensor_form, axis1=axis, axis2=axis + tensor_form.ndim // 2)
    return tensor_form.reshape(dims[keep], dims[keep])
