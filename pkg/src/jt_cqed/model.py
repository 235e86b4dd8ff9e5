"""
Hamiltonians of the two-resonator circuit and the two-frequency Jahn-Teller
model, the privileged-mode decomposition linking them, and eigenvalue bands.

Three parameterisations are supported:

* ``CircuitParams`` - qubit + two coupled resonators
* ``ScaledParams`` - dimensionless (k_eff, Delta) theory with degenerate
  resonators at unit frequency and hopping J = Delta/2
* ``JTParams`` - two vibrational modes with JT scaling factors k1, k2

The electronic operator V is fixed to sigma_x throughout.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Iterable, List, Tuple

import numpy as np
from scipy import linalg

from .errors import ParameterError, SpaceMismatchError
from .operators import (
    HilbertSpace,
    Operator,
    annihilation,
    embed,
    number,
    pauli,
)

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
CONDITION_RTOL = 1e-9

_SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


def _require(cond: bool, message: str, name: str) -> None:
    if not cond:
        raise ParameterError(message, field=name)


def _finite(name: str, value) -> float:
    v = float(value)
    _require(math.isfinite(v), f"{name} must be finite, got {value!r}", name)
    return v


@dataclass(frozen=True)
class CircuitParams:
    """
    Two resonators coupled to a common qubit (angular frequencies, common unit).

    J and lambda2 may be negative: both carry the sign of the mode-mixing
    coefficient c2 when produced by ``jt_to_circuit``.
    """

    Omega: float
    Omega1: float
    Omega2: float
    lambda1: float
    lambda2: float
    J: float

    def __post_init__(self):
        for name in ("Omega", "Omega1", "Omega2"):
            _require(_finite(name, getattr(self, name)) > 0, f"{name} must be > 0", name)
        _require(_finite("lambda1", self.lambda1) >= 0, "lambda1 must be >= 0", "lambda1")
        _finite("lambda2", self.lambda2)
        _finite("J", self.J)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class ScaledParams:
    """Dimensionless two-parameter model; energies in units of the resonator frequency."""

    k_eff: float
    Delta: float
    qubit_detuning: float = 0.0

    def __post_init__(self):
        _require(_finite("k_eff", self.k_eff) >= 0, "k_eff must be >= 0", "k_eff")
        _require(
            abs(_finite("Delta", self.Delta)) < 2,
            f"|Delta| must be < 2 so both mode frequencies 1 +/- Delta/2 stay positive, "
            f"got {self.Delta}",
            "Delta",
        )
        _require(
            1.0 + _finite("qubit_detuning", self.qubit_detuning) > 0,
            "qubit frequency 1 + qubit_detuning must be > 0",
            "qubit_detuning",
        )

    @property
    def J(self) -> float:
        return self.Delta / 2

    @property
    def qubit_frequency(self) -> float:
        return 1.0 + self.qubit_detuning

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class JTParams:
    """Two-frequency JT model; k1 = k2 = 0 is accepted (decoupled limit)."""

    omega1: float
    omega2: float
    k1: float
    k2: float
    qubit_frequency: float = 1.0
    V_axis: str = field(default="x")

    def __post_init__(self):
        for name in ("omega1", "omega2", "qubit_frequency"):
            _require(_finite(name, getattr(self, name)) > 0, f"{name} must be > 0", name)
        for name in ("k1", "k2"):
            _require(_finite(name, getattr(self, name)) >= 0, f"{name} must be >= 0", name)
        _require(self.V_axis == "x", "only V = sigma_x is supported", "V_axis")

    @property
    def k_eff(self) -> float:
        return math.hypot(self.k1, self.k2)

    def to_dict(self) -> Dict[str, float]:
        d = asdict(self)
        d.pop("V_axis")
        return d


@dataclass(frozen=True)
class EffectiveMode:
    """Result of the privileged-mode rotation alpha_i = sum_k A_ik a_k."""

    omega_eff: float
    k_eff: float
    omega_prime: float
    c2: float
    A: np.ndarray
    omega_bar_moments: Tuple[float, float]


@dataclass(frozen=True)
class HardwareParams:
    """Lumped-element circuit values in SI units (henry, farad)."""

    L1: float
    L2: float
    Lc1: float
    Lc2: float
    C1: float
    C2: float
    Cc: float

    def __post_init__(self):
        for name in ("L1", "L2", "Lc1", "Lc2", "C1", "C2"):
            _require(_finite(name, getattr(self, name)) > 0, f"{name} must be > 0", name)
        _require(_finite("Cc", self.Cc) >= 0, "Cc must be >= 0", "Cc")

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def _check_space(space) -> None:
    if not isinstance(space, HilbertSpace):
        raise SpaceMismatchError(f"expected HilbertSpace, got {type(space).__name__}")


def _quadrature(space: HilbertSpace, mode: int) -> np.ndarray:
    """Single-factor (a + a^dagger) of the given mode."""
    d = space.mode_dims[mode - 1]
    off = np.sqrt(np.arange(1, d, dtype=float))
    return (np.diag(off, k=1) + np.diag(off, k=-1)).astype(complex)


def _coupled_quadrature(space: HilbertSpace, mode: int) -> Operator:
    """(a + a^dagger) sigma_x built as a single Kronecker product."""
    if mode == 1:
        return embed(space, qubit=_SIGMA_X, mode1=_quadrature(space, 1))
    return embed(space, qubit=_SIGMA_X, mode2=_quadrature(space, 2))


def _hopping(space: HilbertSpace) -> Operator:
    a1 = annihilation(space, 1)
    a2 = annihilation(space, 2)
    hop = a1.dag() @ a2
    return hop + hop.dag()


def build_circuit_hamiltonian(p: CircuitParams, space: HilbertSpace) -> Operator:
    """
    H = Omega/2 sz + Omega1 n1 + Omega2 n2
        + [lambda1 (a1 + a1^dag) + lambda2 (a2 + a2^dag)] sx
        + J (a1^dag a2 + a2^dag a1)
    """
    _check_space(space)
    h = (
        pauli(space, "z") * (0.5 * p.Omega)
        + number(space, 1) * p.Omega1
        + number(space, 2) * p.Omega2
        + _coupled_quadrature(space, 1) * p.lambda1
        + _coupled_quadrature(space, 2) * p.lambda2
        + _hopping(space) * p.J
    )
    logger.debug("circuit Hamiltonian built: dims=%s params=%s", space.dims, p)
    return h


def scaled_to_circuit(p: ScaledParams) -> CircuitParams:
    """Unit-frequency resonators, hopping Delta/2, couplings k_eff and k_eff*Delta/2."""
    return CircuitParams(
        Omega=p.qubit_frequency,
        Omega1=1.0,
        Omega2=1.0,
        lambda1=p.k_eff,
        lambda2=p.k_eff * p.Delta / 2,
        J=p.Delta / 2,
    )


def scaled_to_jt(p: ScaledParams) -> JTParams:
    """JT parameters simulated by the scaled model: k1 = k2 = k_eff/sqrt(2)."""
    k = p.k_eff / math.sqrt(2.0)
    return JTParams(
        omega1=1.0 + p.Delta / 2,
        omega2=1.0 - p.Delta / 2,
        k1=k,
        k2=k,
        qubit_frequency=p.qubit_frequency,
    )


def build_scaled_hamiltonian(p: ScaledParams, space: HilbertSpace) -> Operator:
    return build_circuit_hamiltonian(scaled_to_circuit(p), space)


def build_jt_hamiltonian(p: JTParams, space: HilbertSpace) -> Operator:
    """
    H = w1 n1 + w2 n2 + Omega/2 sz + [k1 w1 (a1 + a1^dag) + k2 w2 (a2 + a2^dag)] sx
    """
    _check_space(space)
    h = (
        number(space, 1) * p.omega1
        + number(space, 2) * p.omega2
        + pauli(space, "z") * (0.5 * p.qubit_frequency)
        + _coupled_quadrature(space, 1) * (p.k1 * p.omega1)
        + _coupled_quadrature(space, 2) * (p.k2 * p.omega2)
    )
    logger.debug("JT Hamiltonian built: dims=%s params=%s", space.dims, p)
    return h


def moments(p: JTParams, n: int) -> float:
    """Coupling-weighted frequency moment (w1^n k1^2 + w2^n k2^2) / (k1^2 + k2^2)."""
    k_sq = p.k1 ** 2 + p.k2 ** 2
    if k_sq == 0:
        raise ParameterError("moments undefined for zero total coupling", field="k1,k2")
    return (p.omega1 ** n * p.k1 ** 2 + p.omega2 ** n * p.k2 ** 2) / k_sq


def effective_mode_decomposition(p: JTParams) -> EffectiveMode:
    """
    Rotate the two vibrational modes onto the privileged mode.

    The first row of A is fixed by A11:A12 = k1:k2 (maximising k_eff^2 w_eff);
    the second row follows from orthogonality.

    Args:
        p: JT parameters with k1, k2 not both zero

    Returns:
        EffectiveMode with w_eff, k_eff, w', c2, A and the first two moments
    """
    k_sq = p.k1 ** 2 + p.k2 ** 2
    if k_sq == 0:
        raise ParameterError(
            "effective mode undefined for zero total coupling (k1 = k2 = 0)", field="k1,k2"
        )
    k_eff = math.sqrt(k_sq)
    omega_eff = (p.omega1 * p.k1 ** 2 + p.omega2 * p.k2 ** 2) / k_sq
    omega_prime = (p.omega1 * p.k2 ** 2 + p.omega2 * p.k1 ** 2) / k_sq
    c2 = (p.omega1 - p.omega2) * p.k1 * p.k2 / k_sq
    A = np.array([[p.k1, p.k2], [p.k2, -p.k1]], dtype=float) / k_eff
    A.setflags(write=False)
    return EffectiveMode(
        omega_eff=omega_eff,
        k_eff=k_eff,
        omega_prime=omega_prime,
        c2=c2,
        A=A,
        omega_bar_moments=(moments(p, 1), moments(p, 2)),
    )


def jt_to_circuit(p: JTParams) -> CircuitParams:
    """
    Circuit parameters simulating the given JT model.

    Omega1 = w_eff, Omega2 = w', lambda1 = w_eff k_eff, lambda2 = c2 k_eff, J = c2.
    The sign of c2 is carried by both J and lambda2, so Omega1*lambda2 == lambda1*J.
    """
    em = effective_mode_decomposition(p)
    return CircuitParams(
        Omega=p.qubit_frequency,
        Omega1=em.omega_eff,
        Omega2=em.omega_prime,
        lambda1=em.omega_eff * em.k_eff,
        lambda2=em.c2 * em.k_eff,
        J=em.c2,
    )


def condition_residual(p: CircuitParams) -> float:
    """Omega1 - (lambda1/lambda2) J; zero for a mappable circuit (inf if lambda2 = 0 != J)."""
    if p.lambda2 == 0:
        return 0.0 if p.J == 0 else math.copysign(math.inf, -p.J * p.lambda1)
    return p.Omega1 - (p.lambda1 / p.lambda2) * p.J


def circuit_to_jt(p: CircuitParams, rtol: float = CONDITION_RTOL) -> JTParams:
    """
    Invert ``jt_to_circuit``.

    The resonator block [[Omega1, J], [J, Omega2]] equals A diag(w1, w2) A, so
    w1, w2 and the rotation angle theta (k1 = k_eff cos theta, k2 = k_eff sin
    theta, theta in [0, pi/2]) follow in closed form.
    A circuit with lambda1 = lambda2 = 0 maps to an uncoupled JT model
    (k1 = k2 = 0) whose frequencies are the normal modes of the resonator block.

    Raises:
        ParameterError: if Omega1 * lambda2 != lambda1 * J within rtol
    """
    scale = max(abs(p.Omega1 * p.lambda2), abs(p.lambda1 * p.J))
    mismatch = abs(p.Omega1 * p.lambda2 - p.lambda1 * p.J)
    if mismatch > rtol * scale:
        residual = condition_residual(p)
        raise ParameterError(
            f"condition Omega1 = (lambda1/lambda2) J violated: residual {residual:.12g}",
            field="params",
        )

    k_eff = p.lambda1 / p.Omega1
    J = p.J
    dw = p.Omega1 - p.Omega2
    spread = math.hypot(dw, 2.0 * J)
    if spread == 0.0:
        theta = math.pi / 4
        D = 0.0
    else:
        sign = math.copysign(1.0, J) if J != 0 else math.copysign(1.0, dw)
        D = sign * spread
        theta = 0.5 * math.atan2(2.0 * J / D, dw / D)
    omega1 = 0.5 * (p.Omega1 + p.Omega2 + D)
    omega2 = 0.5 * (p.Omega1 + p.Omega2 - D)
    return JTParams(
        omega1=omega1,
        omega2=omega2,
        k1=k_eff * abs(math.cos(theta)),
        k2=k_eff * abs(math.sin(theta)),
        qubit_frequency=p.Omega,
    )


def frequency_ratio(delta):
    """
    w1 / w2 = (1 + Delta/2) / (1 - Delta/2) for the scaled model.

    Exact for ``fractions.Fraction`` input: Delta = 1 -> 3, Delta = 2/3 -> 2.
    """
    half = delta / 2
    if not abs(half) < 1:
        raise ParameterError(f"|Delta| must be < 2, got {delta}", field="Delta")
    return (1 + half) / (1 - half)


def build_eta(p: JTParams, space: HilbertSpace) -> Operator:
    """Bright qubit-polariton operator eta = a1 + k_eff sigma_x."""
    _check_space(space)
    return annihilation(space, 1) + pauli(space, "x") * p.k_eff


def build_effective_hamiltonian(p: JTParams, space: HilbertSpace) -> Operator:
    """Privileged single-mode part: Omega/2 sz + w_eff [n1 + k_eff (a1 + a1^dag) sx]."""
    _check_space(space)
    em = effective_mode_decomposition(p)
    return pauli(space, "z") * (0.5 * p.qubit_frequency) + (
        number(space, 1) + _coupled_quadrature(space, 1) * em.k_eff
    ) * em.omega_eff


def build_interaction_hamiltonian(p: JTParams, space: HilbertSpace) -> Operator:
    """Disadvantaged-mode coupling: c2 [(a1^dag a2 + a1 a2^dag) + k_eff (a2 + a2^dag) sx]."""
    _check_space(space)
    em = effective_mode_decomposition(p)
    return (_hopping(space) + _coupled_quadrature(space, 2) * em.k_eff) * em.c2


def lowest_eigenvalues(H: Operator, m: int) -> List[float]:
    """
    The m smallest eigenvalues of a Hermitian operator, ascending.

    Raises:
        ParameterError: if H is not Hermitian within 1e-10 or m is out of range
    """
    n = H.space.total_dim
    if not 1 <= m <= n:
        raise ParameterError(f"m must be in [1, {n}], got {m}", field="m")
    err = H.hermiticity_error()
    if err > HERMITIAN_TOL:
        raise ParameterError(f"operator is not Hermitian (max |H - H^dag| = {err:.3g})")
    herm = 0.5 * (H.matrix + H.matrix.conj().T)
    vals = linalg.eigvalsh(herm, subset_by_index=[0, m - 1])
    return [float(v) for v in np.sort(vals)]


def eigen_bands(
    builder: Callable[[float], Operator], values: Iterable[float], m: int
) -> np.ndarray:
    """Stack ``lowest_eigenvalues(builder(v), m)`` over a parameter grid, one row per value."""
    return np.array([lowest_eigenvalues(builder(v), m) for v in values], dtype=float)


def coupling_from_hardware(h: HardwareParams) -> Tuple[float, float, float]:
    """
    Resonator frequencies and capacitive hopping rate from circuit values.

    w_i = 1 / sqrt((L_i + Lc_i) C_i),  J = Cc sqrt(w1 w2 / (4 C1 C2)); all in rad/s.
    """
    omega1 = 1.0 / math.sqrt((h.L1 + h.Lc1) * h.C1)
    omega2 = 1.0 / math.sqrt((h.L2 + h.Lc2) * h.C2)
    J = h.Cc * math.sqrt(omega1 * omega2 / (4.0 * h.C1 * h.C2))
    return omega1, omega2, J
