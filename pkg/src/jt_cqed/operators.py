"""
Operator algebra on the qubit (x) mode1 (x) mode2 composite space.

Basis ordering is qubit-major, then mode 1, then mode 2::

    index = ((q * d1) + n1) * d2 + n2

Qubit index 0 is the excited state (sigma_z = +1), index 1 the ground state.
All matrices are dense complex128.
"""

from dataclasses import dataclass
from numbers import Number
from typing import Optional, Tuple

import numpy as np

from .errors import ParameterError, SpaceMismatchError

QUBIT_DIM = 2

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "plus": np.array([[0, 1], [0, 0]], dtype=complex),
    "minus": np.array([[0, 0], [1, 0]], dtype=complex),
}


@dataclass(frozen=True)
class HilbertSpace:
    """Factor dimensions of the qubit (x) mode1 (x) mode2 space."""

    mode_dims: Tuple[int, int]
    qubit_dim: int = QUBIT_DIM

    def __post_init__(self):
        if self.qubit_dim != QUBIT_DIM:
            raise ParameterError(f"qubit_dim must be 2, got {self.qubit_dim}", field="qubit_dim")
        dims = tuple(int(d) for d in self.mode_dims)
        if len(dims) != 2:
            raise ParameterError(
                f"exactly two mode dimensions required, got {len(dims)}", field="dims"
            )
        for i, d in enumerate(dims, start=1):
            if d < 2:
                raise ParameterError(f"mode {i} dimension must be >= 2, got {d}", field="dims")
        object.__setattr__(self, "mode_dims", dims)

    @property
    def dims(self) -> Tuple[int, int, int]:
        return (self.qubit_dim,) + self.mode_dims

    @property
    def total_dim(self) -> int:
        d1, d2 = self.mode_dims
        return self.qubit_dim * d1 * d2

    def index(self, q: int, n1: int, n2: int) -> int:
        """Flat basis index of |q, n1, n2>."""
        d1, d2 = self.mode_dims
        if not (0 <= q < self.qubit_dim and 0 <= n1 < d1 and 0 <= n2 < d2):
            raise ParameterError(f"basis label ({q}, {n1}, {n2}) outside {self.dims}")
        return ((q * d1) + n1) * d2 + n2

    def labels(self):
        """Iterate (q, n1, n2) in basis order."""
        d1, d2 = self.mode_dims
        for q in range(self.qubit_dim):
            for n1 in range(d1):
                for n2 in range(d2):
                    yield q, n1, n2


class Operator:
    """
    Dense square matrix tagged with the space it acts on.

    The matrix is copied on construction and marked read-only; arithmetic
    always returns new operators.
    """

    __slots__ = ("space", "matrix")
    # numpy scalars on the left defer to __rmul__
    __array_ufunc__ = None

    def __init__(self, space: HilbertSpace, matrix):
        m = np.array(matrix, dtype=complex, copy=True)
        n = space.total_dim
        if m.shape != (n, n):
            raise SpaceMismatchError(f"matrix shape {m.shape} does not match space dimension {n}")
        m.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", m)

    def __setattr__(self, name, value):
        raise AttributeError("Operator is immutable")

    def __repr__(self) -> str:
        return f"Operator(dims={self.space.dims})"

    def _check(self, other: "Operator") -> None:
        if not isinstance(other, Operator):
            raise TypeError(f"expected Operator, got {type(other).__name__}")
        if other.space != self.space:
            raise SpaceMismatchError(
                f"operators act on different spaces {self.space.dims} and {other.space.dims}"
            )

    def dag(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.matrix - other.matrix)

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.matrix)

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.matrix @ other.matrix)

    def __mul__(self, scalar) -> "Operator":
        if not isinstance(scalar, Number):
            return NotImplemented
        return Operator(self.space, scalar * self.matrix)

    __rmul__ = __mul__

    def hermiticity_error(self) -> float:
        """max |H - H^dagger| over all entries."""
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.hermiticity_error() <= tol

    def allclose(self, other: "Operator", atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.allclose(self.matrix, other.matrix, rtol=0.0, atol=atol))


def make_space(d1: int, d2: int) -> HilbertSpace:
    """
    Build the composite space with per-mode Fock truncation d1, d2.

    Args:
        d1: Number of Fock levels kept for mode 1 (occupations 0..d1-1)
        d2: Number of Fock levels kept for mode 2

    Returns:
        HilbertSpace with total dimension 2*d1*d2
    """
    return HilbertSpace(mode_dims=(d1, d2))


def _lowering(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1).astype(complex)


def embed(
    space: HilbertSpace,
    qubit: Optional[np.ndarray] = None,
    mode1: Optional[np.ndarray] = None,
    mode2: Optional[np.ndarray] = None,
) -> Operator:
    """Tensor single-factor matrices together, filling gaps with identities."""
    d1, d2 = space.mode_dims
    factors = (
        np.eye(space.qubit_dim, dtype=complex) if qubit is None else qubit,
        np.eye(d1, dtype=complex) if mode1 is None else mode1,
        np.eye(d2, dtype=complex) if mode2 is None else mode2,
    )
    return Operator(space, np.kron(np.kron(factors[0], factors[1]), factors[2]))


def identity(space: HilbertSpace) -> Operator:
    return Operator(space, np.eye(space.total_dim, dtype=complex))


def annihilation(space: HilbertSpace, mode: int) -> Operator:
    """
    Truncated lowering operator of resonator `mode` (1 or 2).

    <n-1|a|n> = sqrt(n) for n = 1..d-1; identities on the other factors.
    """
    if mode == 1:
        return embed(space, mode1=_lowering(space.mode_dims[0]))
    if mode == 2:
        return embed(space, mode2=_lowering(space.mode_dims[1]))
    raise ParameterError(f"mode must be 1 or 2, got {mode!r}", field="mode")


def creation(space: HilbertSpace, mode: int) -> Operator:
    return annihilation(space, mode).dag()


def number(space: HilbertSpace, mode: int) -> Operator:
    a = annihilation(space, mode)
    return a.dag() @ a


def pauli(space: HilbertSpace, axis: str) -> Operator:
    """
    Qubit operator embedded with identities on both modes.

    Args:
        space: Target space
        axis: One of "x", "y", "z", "plus", "minus"

    Returns:
        The embedded Pauli (or ladder) operator; sigma_x = sigma_plus + sigma_minus
    """
    try:
        m = _PAULI[axis]
    except (KeyError, TypeError):
        raise ParameterError(
            f"axis must be one of {sorted(_PAULI)}, got {axis!r}", field="axis"
        ) from None
    return embed(space, qubit=m)


def adjoint(op: Operator) -> Operator:
    return op.dag()


dagger = adjoint


def commutator(a: Operator, b: Operator) -> Operator:
    """[A, B] = AB - BA."""
    a._check(b)
    return Operator(a.space, a.matrix @ b.matrix - b.matrix @ a.matrix)


def basis_index(space: HilbertSpace, q: int, n1: int, n2: int) -> int:
    return space.index(q, n1, n2)


def basis_state(space: HilbertSpace, q: int, n1: int, n2: int) -> np.ndarray:
    """Column vector |q, n1, n2>."""
    v = np.zeros(space.total_dim, dtype=complex)
    v[space.index(q, n1, n2)] = 1.0
    return v
