"""
Lindblad master equation on the qubit (x) two-resonator space.

    d rho/dt = -i[H, rho]
               + sum_j (1+n_th) kappa D[a_j] rho + n_th kappa D[a_j^dag] rho
               + gamma D[sigma_-] rho + (gamma_phi/2) D[sigma_z] rho

Superoperators act on column-stacked density matrices:
vec(A X B) = (B^T kron A) vec(X).

The emission spectrum of resonator 1 is the one-sided transform

    P(w) = 2 Re int_0^inf C(t) e^{-i w t} dt,   C(t) = <a1^dag(t) a1(0)>_ss

with the stationary part lim C(t) removed first. No 2*pi prefactor.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, signal

from .errors import (
    ConvergenceError,
    KernelDimensionError,
    ParameterError,
    SingularResolventError,
    SpaceMismatchError,
)
from .operators import HilbertSpace, Operator, annihilation, number, pauli

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-8
KERNEL_TOL = 1e-9
RESIDUAL_TOL = 1e-10

FOURIER_CONVENTION = "P(w) = 2 Re int_0^inf [C(t) - C(inf)] exp(-i w t) dt, no 2pi factor"
VECTORIZATION = "column-stacking"

Matrix = Union[np.ndarray, Operator, "DensityMatrix"]


@dataclass(frozen=True)
class DissipationParams:
    """Loss rates in units of the resonator frequency; defaults are the reference values."""

    kappa: float = 0.001
    gamma: float = 0.001
    gamma_phi: float = 0.01
    n_th: float = 0.1

    def __post_init__(self):
        for name in ("kappa", "gamma", "gamma_phi", "n_th"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise ParameterError(f"{name} must be finite and >= 0, got {value}", field=name)

    def to_dict(self) -> Dict[str, float]:
        return {
            "kappa": self.kappa,
            "gamma": self.gamma,
            "gamma_phi": self.gamma_phi,
            "n_th": self.n_th,
        }


class DensityMatrix:
    """Read-only density matrix on a HilbertSpace."""

    __slots__ = ("space", "matrix")

    def __init__(self, space: HilbertSpace, matrix):
        m = np.array(matrix, dtype=complex, copy=True)
        n = space.total_dim
        if m.shape != (n, n):
            raise SpaceMismatchError(f"density matrix shape {m.shape} != ({n}, {n})")
        m.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", m)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    def __repr__(self) -> str:
        return f"DensityMatrix(dims={self.space.dims})"

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(linalg.eigvalsh(herm)[0])

    def validate(
        self, herm_tol: float = HERMITIAN_TOL, trace_tol: float = TRACE_TOL, psd_tol: float = PSD_TOL
    ) -> "DensityMatrix":
        """Raise ParameterError unless Hermitian, unit trace and positive semidefinite."""
        herm_err = float(np.max(np.abs(self.matrix - self.matrix.conj().T)))
        if herm_err > herm_tol:
            raise ParameterError(f"density matrix not Hermitian (error {herm_err:.3g})")
        if abs(self.trace - 1.0) > trace_tol:
            raise ParameterError(f"density matrix trace {self.trace:.12g} != 1")
        lo = self.min_eigenvalue()
        if lo < -psd_tol:
            raise ParameterError(f"density matrix has negative eigenvalue {lo:.3g}")
        return self

    @classmethod
    def pure(cls, space: HilbertSpace, psi: np.ndarray) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(space, np.outer(psi, psi.conj()))


@dataclass(frozen=True)
class Liouvillian:
    """Dense N^2 x N^2 generator acting on column-stacked density matrices."""

    space: HilbertSpace
    matrix: np.ndarray

    def apply(self, rho: Matrix) -> np.ndarray:
        m = _as_matrix(rho)
        n = self.space.total_dim
        if m.shape != (n, n):
            raise SpaceMismatchError(f"matrix shape {m.shape} != ({n}, {n})")
        return unvec(self.matrix @ vec(m), n)


@dataclass(frozen=True)
class Spectrum:
    omegas: np.ndarray
    values: np.ndarray
    method: str
    metadata: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.omegas) != len(self.values):
            raise ParameterError("omegas and values must have the same length")


def vec(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).reshape(-1, order="F")


def unvec(v: np.ndarray, n: int) -> np.ndarray:
    return np.asarray(v).reshape((n, n), order="F")


def _as_matrix(x: Matrix) -> np.ndarray:
    if isinstance(x, (Operator, DensityMatrix)):
        return x.matrix
    return np.asarray(x, dtype=complex)


def _trace_row(m: np.ndarray) -> np.ndarray:
    """Row vector r with r @ vec(X) == Tr[m X]."""
    return vec(m.T)


def dissipator(Lop: Matrix, rho: Matrix) -> np.ndarray:
    """D[L] rho = L rho L^dag - 1/2 {L^dag L, rho}."""
    c = _as_matrix(Lop)
    r = _as_matrix(rho)
    if c.shape != r.shape or c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise SpaceMismatchError(f"shape mismatch: operator {c.shape}, rho {r.shape}")
    cd = c.conj().T
    cdc = cd @ c
    return c @ r @ cd - 0.5 * (cdc @ r + r @ cdc)


def _dissipator_super(c: np.ndarray) -> np.ndarray:
    n = c.shape[0]
    eye = np.eye(n, dtype=complex)
    cdc = c.conj().T @ c
    return np.kron(c.conj(), c) - 0.5 * np.kron(eye, cdc) - 0.5 * np.kron(cdc.T, eye)


def collapse_operators(space: HilbertSpace, d: DissipationParams) -> List[Tuple[float, Operator]]:
    """(rate, jump operator) pairs; zero rates are dropped."""
    ops = []
    for mode in (1, 2):
        a = annihilation(space, mode)
        ops.append(((1.0 + d.n_th) * d.kappa, a))
        ops.append((d.n_th * d.kappa, a.dag()))
    ops.append((d.gamma, pauli(space, "minus")))
    ops.append((0.5 * d.gamma_phi, pauli(space, "z")))
    return [(rate, op) for rate, op in ops if rate > 0]


def build_liouvillian(H: Operator, d: DissipationParams) -> Liouvillian:
    """
    Matrix of rho -> -i[H, rho] + L rho in column-stacking convention.

    Raises:
        ParameterError: if H is not Hermitian within 1e-10
    """
    err = H.hermiticity_error()
    if err > HERMITIAN_TOL:
        raise ParameterError(f"Hamiltonian is not Hermitian (max |H - H^dag| = {err:.3g})")
    n = H.space.total_dim
    eye = np.eye(n, dtype=complex)
    h = H.matrix
    L = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for rate, op in collapse_operators(H.space, d):
        L = L + rate * _dissipator_super(op.matrix)
    logger.debug("Liouvillian built: N=%d, superoperator size %d", n, n * n)
    L.setflags(write=False)
    return Liouvillian(space=H.space, matrix=L)


def liouvillian_spectrum(L: Liouvillian) -> np.ndarray:
    """Eigenvalues of L, slowest (largest real part) first."""
    ev = linalg.eigvals(L.matrix)
    return ev[np.argsort(-ev.real, kind="stable")]


def kernel_dimension(L: Liouvillian, tol: float = KERNEL_TOL) -> Tuple[int, np.ndarray]:
    """Number of singular values of L below tol * max(1, ||L||_2), and the smallest few."""
    s = linalg.svdvals(L.matrix)
    threshold = tol * max(1.0, float(s[0]))
    mult = int(np.count_nonzero(s <= threshold))
    return mult, np.sort(s)[:4]


def steady_state(L: Liouvillian, kernel_tol: float = KERNEL_TOL) -> DensityMatrix:
    """
    Unique stationary state of L.

    One row of L (the equation for rho_00) is replaced by the trace functional,
    the bordered system is solved directly, and the result is Hermitised and
    normalised.

    Raises:
        KernelDimensionError: if the kernel of L is not one-dimensional
        ConvergenceError: if the residual |L rho| exceeds 1e-10 or rho is not PSD
    """
    n = L.space.total_dim
    mult, smallest = kernel_dimension(L, kernel_tol)
    logger.debug("Liouvillian smallest singular values: %s", smallest)
    if mult != 1:
        raise KernelDimensionError(mult, smallest)

    A = np.array(L.matrix, copy=True)
    A[0, :] = vec(np.eye(n, dtype=complex))
    b = np.zeros(n * n, dtype=complex)
    b[0] = 1.0
    try:
        x = linalg.solve(A, b)
    except linalg.LinAlgError as exc:
        raise ConvergenceError(f"steady-state solve failed: {exc}") from exc

    rho = unvec(x, n)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    residual = float(np.max(np.abs(L.matrix @ vec(rho))))
    logger.debug("steady-state residual %.3g", residual)
    if residual > RESIDUAL_TOL:
        raise ConvergenceError(f"steady-state residual {residual:.3g} exceeds {RESIDUAL_TOL:g}")
    dm = DensityMatrix(L.space, rho)
    lo = dm.min_eigenvalue()
    if lo < -PSD_TOL:
        raise ConvergenceError(f"steady state has negative eigenvalue {lo:.3g}")
    return dm


def evolve(L: Liouvillian, rho0: Matrix, t: float) -> DensityMatrix:
    """rho(t) = exp(L t) rho0."""
    if t < 0:
        raise ParameterError(f"evolution time must be >= 0, got {t}", field="t")
    n = L.space.total_dim
    r0 = _as_matrix(rho0)
    if t == 0:
        return DensityMatrix(L.space, r0)
    v = linalg.expm(L.matrix * t) @ vec(r0)
    rho = unvec(v, n)
    return DensityMatrix(L.space, 0.5 * (rho + rho.conj().T))


def _propagate(L: Liouvillian, seed: np.ndarray, row: np.ndarray, times: np.ndarray) -> np.ndarray:
    """row @ exp(L t) seed for each t; repeated step sizes reuse one propagator."""
    out = np.empty(len(times), dtype=complex)
    cache: Dict[float, np.ndarray] = {}
    v = seed
    t_prev = 0.0
    for idx in np.argsort(times, kind="stable"):
        dt = float(f"{times[idx] - t_prev:.12g}")
        if dt > 0:
            P = cache.get(dt)
            if P is None:
                if len(cache) > 64:
                    cache.clear()
                P = cache[dt] = linalg.expm(L.matrix * dt)
            v = P @ v
        out[idx] = row @ v
        t_prev = times[idx]
    return out


def correlation(L: Liouvillian, rho_ss: Matrix, times: Sequence[float]) -> np.ndarray:
    """
    C(t) = Tr[a1^dag exp(L t)(a1 rho_ss)] by the quantum regression theorem.

    Raises:
        ParameterError: if any time is negative
    """
    t = np.asarray(times, dtype=float)
    if np.any(t < 0):
        raise ParameterError("correlation times must be >= 0", field="times")
    a1 = annihilation(L.space, 1).matrix
    rho = _as_matrix(rho_ss)
    return _propagate(L, vec(a1 @ rho), _trace_row(a1.conj().T), t)


def _stationary_seed(L: Liouvillian, rho: np.ndarray) -> Tuple[np.ndarray, np.ndarray, complex]:
    """a1 rho_ss with its component along the kernel removed, plus the observable row."""
    a1 = annihilation(L.space, 1).matrix
    seed = a1 @ rho
    mean = np.trace(seed)
    seed = seed - mean * rho
    return vec(seed), _trace_row(a1.conj().T), mean


def emission_spectrum(
    L: Liouvillian,
    rho_ss: Matrix,
    omegas: Sequence[float],
    method: str = "resolvent",
    **kwargs,
) -> Spectrum:
    """
    Stationary emission spectrum of resonator 1.

    Args:
        L: Liouvillian with a unique steady state
        rho_ss: Its steady state
        omegas: Frequency grid (units of the resonator frequency)
        method: "resolvent" (one linear solve per frequency) or "time-domain"
            (propagate C(t) and integrate by the trapezoidal rule)

    Returns:
        Spectrum with real values and the Fourier convention in metadata
    """
    w = np.asarray(omegas, dtype=float)
    if w.ndim != 1 or not np.all(np.isfinite(w)):
        raise ParameterError("omega grid must be a finite 1-D sequence", field="omega")
    rho = _as_matrix(rho_ss)
    if method == "resolvent":
        if kwargs:
            raise ParameterError(f"unexpected options for resolvent method: {sorted(kwargs)}")
        values = _resolvent_spectrum(L, rho, w)
        extra: Dict[str, object] = {}
    elif method == "time-domain":
        values, extra = _time_domain_spectrum(L, rho, w, **kwargs)
    else:
        raise ParameterError(
            f"method must be 'resolvent' or 'time-domain', got {method!r}", field="method"
        )
    metadata = {"convention": FOURIER_CONVENTION, "vectorization": VECTORIZATION}
    metadata.update(extra)
    return Spectrum(omegas=w, values=values, method=method, metadata=metadata)


def _resolvent_spectrum(L: Liouvillian, rho: np.ndarray, omegas: np.ndarray) -> np.ndarray:
    n = L.space.total_dim
    seed, row, _ = _stationary_seed(L, rho)
    # rank-one shift moves the kernel eigenvalue to -1; traceless seeds are unaffected
    shifted = L.matrix - np.outer(vec(rho), vec(np.eye(n, dtype=complex)))
    eye = np.eye(n * n, dtype=complex)
    values = np.empty(len(omegas), dtype=float)
    for i, w in enumerate(omegas):
        with warnings.catch_warnings():
            warnings.simplefilter("error", linalg.LinAlgWarning)
            try:
                x = linalg.solve(shifted - 1j * w * eye, seed)
            except (linalg.LinAlgError, linalg.LinAlgWarning) as exc:
                raise SingularResolventError(float(w), str(exc)) from exc
        values[i] = -2.0 * float(np.real(row @ x))
    return values


def _time_domain_spectrum(
    L: Liouvillian,
    rho: np.ndarray,
    omegas: np.ndarray,
    dt: Optional[float] = None,
    rtol: float = 1e-10,
    block: int = 1024,
    max_steps: int = 5_000_000,
) -> Tuple[np.ndarray, Dict[str, object]]:
    """
    Sample C(t) on a uniform grid until the propagated seed has decayed below
    rtol of its initial norm, then integrate by the trapezoidal rule.

    Samples are produced a block at a time: rows of ``row @ P^k`` for
    k < block are precomputed, so each block costs one matrix-vector product.
    """
    seed, row, _ = _stationary_seed(L, rho)
    scale = float(np.linalg.norm(seed))
    if scale == 0.0:
        return np.zeros(len(omegas)), {"dt": 0.0, "horizon": 0.0, "steps": 0}
    if dt is None:
        fastest = float(np.max(np.abs(liouvillian_spectrum(L).imag)))
        span = fastest + float(np.max(np.abs(omegas), initial=0.0))
        dt = min(0.25, math.pi / (2.0 * max(span, 1.0)))
    if dt <= 0:
        raise ParameterError(f"time step must be > 0, got {dt}", field="dt")

    P = linalg.expm(L.matrix * dt)
    rows = np.empty((block, row.size), dtype=complex)
    r = row
    for k in range(block):
        rows[k] = r
        r = r @ P
    jump = np.linalg.matrix_power(P, block)

    pieces = []
    v = seed
    steps = 0
    while True:
        pieces.append(rows @ v)
        v = jump @ v
        steps += block
        if np.linalg.norm(v) <= rtol * scale:
            break
        if steps >= max_steps:
            raise ConvergenceError(
                f"correlation has not decayed after {steps} steps of dt={dt:.3g}; "
                f"time-domain spectrum undefined"
            )
    corr = np.concatenate(pieces + [np.array([row @ v])])
    horizon = steps * dt
    logger.info("time-domain spectrum: dt=%.4g, horizon=%.4g, %d steps", dt, horizon, steps)

    weights = np.ones(steps + 1)
    weights[0] = weights[-1] = 0.5
    weighted = corr * weights
    t = dt * np.arange(steps + 1)
    values = np.array(
        [2.0 * dt * float(np.real(np.dot(weighted, np.exp(-1j * w * t)))) for w in omegas]
    )
    return values, {"dt": dt, "horizon": horizon, "steps": steps}


def spectrum_peaks(spectrum: Spectrum, rel_height: float = 0.01) -> List[Tuple[float, float]]:
    """Interior local maxima at or above rel_height * max, as (omega, value), by frequency."""
    v = spectrum.values
    if v.size < 3:
        return []
    idx, _ = signal.find_peaks(v, height=rel_height * float(np.max(v)))
    return [(float(spectrum.omegas[i]), float(v[i])) for i in idx]


def expectation(op: Operator, rho: Matrix) -> complex:
    return complex(np.trace(op.matrix @ _as_matrix(rho)))


def photon_numbers(rho: DensityMatrix) -> Tuple[float, float]:
    """<a1^dag a1>, <a2^dag a2>."""
    return (
        expectation(number(rho.space, 1), rho).real,
        expectation(number(rho.space, 2), rho).real,
    )


def qubit_excited_population(rho: DensityMatrix) -> float:
    sp = pauli(rho.space, "plus")
    return expectation(sp @ sp.dag(), rho).real


def is_valid_density_matrix(rho: Matrix) -> bool:
    """Hermitian, unit trace and PSD within the DensityMatrix tolerances."""
    m = _as_matrix(rho)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
        return False
    if abs(np.trace(m) - 1.0) > TRACE_TOL:
        return False
    return float(linalg.eigvalsh(0.5 * (m + m.conj().T))[0]) >= -PSD_TOL
