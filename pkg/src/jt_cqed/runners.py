"""
Mode runners: turn a RunConfig into a ResultTable.

Sweep points are independent; with ``jobs > 1`` they are evaluated in a
process pool and reassembled in grid order, so output does not depend on
the worker count.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from itertools import repeat
from typing import Any, Callable, Dict, List, Mapping, Sequence, Tuple

import numpy as np

from . import __version__
from .config import RunConfig
from .dynamics import (
    FOURIER_CONVENTION,
    VECTORIZATION,
    build_liouvillian,
    emission_spectrum,
    photon_numbers,
    qubit_excited_population,
    spectrum_peaks,
    steady_state,
)
from .errors import ParameterError
from .model import (
    CircuitParams,
    JTParams,
    ScaledParams,
    build_circuit_hamiltonian,
    build_jt_hamiltonian,
    build_scaled_hamiltonian,
    circuit_to_jt,
    condition_residual,
    coupling_from_hardware,
    effective_mode_decomposition,
    frequency_ratio,
    jt_to_circuit,
    lowest_eigenvalues,
    scaled_to_circuit,
    scaled_to_jt,
)
from .operators import HilbertSpace, Operator, make_space
from .report import ResultTable, column_names

logger = logging.getLogger(__name__)

BASIS_CONVENTION = "index = ((q*d1)+n1)*d2+n2, qubit index 0 excited"

Point = Dict[str, float]


def build_hamiltonian(params, space: HilbertSpace) -> Operator:
    """Dispatch on the parameter type of any supported form."""
    if isinstance(params, ScaledParams):
        return build_scaled_hamiltonian(params, space)
    if isinstance(params, CircuitParams):
        return build_circuit_hamiltonian(params, space)
    if isinstance(params, JTParams):
        return build_jt_hamiltonian(params, space)
    raise ParameterError(f"unsupported parameter type {type(params).__name__}")


def _base_metadata(cfg: RunConfig) -> Dict[str, Any]:
    # worker count and destination do not change the numbers
    config = cfg.to_dict()
    config.pop("jobs")
    config.pop("output")
    return {
        "config": config,
        "conventions": {
            "basis": BASIS_CONVENTION,
            "fourier": FOURIER_CONVENTION,
            "vectorization": VECTORIZATION,
            "units": "frequencies and rates in units of the resonator frequency",
        },
        "version": __version__,
    }


def _truncation_note(cfg: RunConfig) -> Dict[str, Any]:
    if cfg.dissipation.n_th > 0 and min(cfg.dims) == 2:
        n = cfg.dissipation.n_th
        return {
            "truncation_note": (
                f"two-level truncation saturates thermal occupation: "
                f"<n> = n_th/(1+2 n_th) = {n / (1 + 2 * n):.6g} instead of {n:.6g}"
            )
        }
    return {}


def _grid(cfg: RunConfig) -> List[Point]:
    if cfg.sweep is None:
        return [{}]
    points = [{cfg.sweep.param: float(v)} for v in cfg.sweep.values()]
    if cfg.sweep2 is not None:
        points = [
            {**p, cfg.sweep2.param: float(v)} for p in points for v in cfg.sweep2.values()
        ]
    return points


def _grid_columns(cfg: RunConfig) -> List[str]:
    return [axis.param for axis in (cfg.sweep, cfg.sweep2) if axis is not None]


def _map_points(fn: Callable[[RunConfig, Point], Any], cfg: RunConfig, points: Sequence[Point]):
    workers = min(cfg.jobs, len(points))
    if workers <= 1:
        return [fn(cfg, p) for p in points]
    logger.info("evaluating %d points on %d workers", len(points), workers)
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, repeat(cfg), points))


def eigen_point(cfg: RunConfig, point: Point) -> List[float]:
    space = make_space(*cfg.dims)
    H = build_hamiltonian(cfg.model_params(point), space)
    return lowest_eigenvalues(H, cfg.eigen_count)


def spectrum_point(cfg: RunConfig, point: Point) -> Tuple[np.ndarray, Dict[str, Any]]:
    """Steady state and emission spectrum of resonator 1 at one parameter point."""
    space = make_space(*cfg.dims)
    H = build_hamiltonian(cfg.model_params(point), space)
    L = build_liouvillian(H, cfg.dissipation)
    rho = steady_state(L)
    spec = emission_spectrum(L, rho, cfg.omega.values(), method=cfg.spectrum_method)
    n1, n2 = photon_numbers(rho)
    info = {
        "photon_numbers": [n1, n2],
        "qubit_excited_population": qubit_excited_population(rho),
        "peaks": spectrum_peaks(spec),
        "spectrum": {"method": spec.method, **spec.metadata},
    }
    return spec.values, info


def run_eigens(cfg: RunConfig) -> ResultTable:
    """
    Lowest eigenvalues over the sweep grid, one row per point.

    Columns are the swept parameter(s) followed by E0..E{m-1}.
    """
    points = _grid(cfg)
    logger.info("eigens: %d points, %d levels, dims=%s", len(points), cfg.eigen_count, cfg.dims)
    levels = _map_points(eigen_point, cfg, points)
    axes = _grid_columns(cfg)
    rows = [[p[a] for a in axes] + list(vals) for p, vals in zip(points, levels)]
    return ResultTable(
        columns=axes + list(column_names("E", cfg.eigen_count)),
        rows=rows,
        metadata=_base_metadata(cfg),
    )


def run_spectrum(cfg: RunConfig) -> ResultTable:
    """
    Emission spectrum at a single point, or a long-format map over one sweep axis.

    Single point: columns (omega, P). Map: columns (<param>, omega, P), rows in
    sweep-major order.
    """
    points = _grid(cfg)
    omegas = cfg.omega.values()
    logger.info(
        "spectrum: %d points x %d frequencies, method=%s", len(points), omegas.size, cfg.spectrum_method
    )
    results = _map_points(spectrum_point, cfg, points)
    metadata = {**_base_metadata(cfg), **_truncation_note(cfg)}
    axes = _grid_columns(cfg)
    rows = []
    for p, (values, _) in zip(points, results):
        prefix = [p[a] for a in axes]
        rows.extend(prefix + [float(w), float(v)] for w, v in zip(omegas, values))
    if not axes:
        metadata["steady_state"] = results[0][1]
    else:
        metadata["spectrum"] = results[0][1]["spectrum"]
    return ResultTable(columns=axes + ["omega", "P"], rows=rows, metadata=metadata)


_MAP_COLUMNS = [
    "omega1",
    "omega2",
    "k1",
    "k2",
    "k_eff",
    "omega_eff",
    "omega_prime",
    "c2",
    "Omega",
    "Omega1",
    "Omega2",
    "lambda1",
    "lambda2",
    "J",
    "omega_ratio",
    "condition_residual",
]


def _mapped_pair(params) -> Tuple[JTParams, CircuitParams, float]:
    if isinstance(params, ScaledParams):
        return scaled_to_jt(params), scaled_to_circuit(params), frequency_ratio(params.Delta)
    if isinstance(params, JTParams):
        return params, jt_to_circuit(params), params.omega1 / params.omega2
    jt = circuit_to_jt(params)
    return jt, params, jt.omega1 / jt.omega2


def run_map_params(cfg: RunConfig) -> ResultTable:
    """
    Map the configured parameters to the other two forms.

    One row holding the JT parameters, the effective-mode quantities, the
    circuit parameters, w1/w2 and the mapping-condition residual.

    Raises:
        ParameterError: circuit parameters violating Omega1 = (lambda1/lambda2) J
    """
    params = cfg.model_params()
    jt, circuit, ratio = _mapped_pair(params)
    if jt.k_eff > 0:
        em = effective_mode_decomposition(jt)
        eff = (em.omega_eff, em.omega_prime, em.c2)
    else:
        eff = (math.nan, math.nan, math.nan)
    residual = condition_residual(circuit)
    logger.info("map-params (%s): residual %.3g", cfg.form, residual)
    row = [
        jt.omega1,
        jt.omega2,
        jt.k1,
        jt.k2,
        jt.k_eff,
        *eff,
        circuit.Omega,
        circuit.Omega1,
        circuit.Omega2,
        circuit.lambda1,
        circuit.lambda2,
        circuit.J,
        float(ratio),
        residual,
    ]
    metadata = _base_metadata(cfg)
    metadata["input"] = {"form": cfg.form, **params.to_dict()}
    return ResultTable(columns=list(_MAP_COLUMNS), rows=[row], metadata=metadata)


def run_hardware(cfg: RunConfig) -> ResultTable:
    """Resonator frequencies and hopping from lumped elements, in rad/s and in units of their mean."""
    omega1, omega2, J = coupling_from_hardware(cfg.hardware)
    mean = 0.5 * (omega1 + omega2)
    logger.info("hardware: w1=%.6g w2=%.6g J=%.6g rad/s", omega1, omega2, J)
    return ResultTable(
        columns=[
            "omega1_rad_s",
            "omega2_rad_s",
            "J_rad_s",
            "omega_mean_rad_s",
            "omega1_rel",
            "omega2_rel",
            "J_rel",
        ],
        rows=[[omega1, omega2, J, mean, omega1 / mean, omega2 / mean, J / mean]],
        metadata=_base_metadata(cfg),
    )


_RUNNERS: Mapping[str, Callable[[RunConfig], ResultTable]] = {
    "eigens": run_eigens,
    "spectrum": run_spectrum,
    "map-params": run_map_params,
    "hardware": run_hardware,
}


def run(cfg: RunConfig) -> ResultTable:
    """Execute the configured mode; ``sweep`` delegates to eigens or spectrum."""
    mode = cfg.what if cfg.mode == "sweep" else cfg.mode
    return _RUNNERS[mode](cfg)
