"""
Run configuration: a YAML document resolved into a frozen ``RunConfig``.

Example document::

    form: scaled
    params: {k_eff: 1.0, Delta: 1.0}
    dissipation: {kappa: 0.001}      # omitted rates take the reference values
    dims: [2, 2]
    sweep: {param: J, from: 0.0, to: 1.0, steps: 41}
    omega: {from: 0.0, to: 2.0, steps: 401}
    output: {format: csv}

Unknown keys are rejected at every level. Errors carry the dotted field path
and, when the value came from the document, its line number.
"""

import math
import re
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np
import yaml

from .dynamics import DissipationParams
from .errors import ConfigError, ParameterError
from .model import CircuitParams, HardwareParams, JTParams, ScaledParams

MODES = ("eigens", "spectrum", "sweep", "map-params", "hardware")
FORMS = ("scaled", "circuit", "jt")
FORMATS = ("csv", "json")
METHODS = ("resolvent", "time-domain")
SWEEP_TARGETS = ("eigens", "spectrum")

MIN_DIM = 2
MAX_DIM = 8

DEFAULT_DIMS = (2, 2)
DEFAULT_EIGEN_COUNT = 5
DEFAULT_SCALED = {"k_eff": 0.1, "Delta": 0.0, "qubit_detuning": 0.0}
DEFAULT_BAND_SWEEP = {"param": "Delta", "from": -1.9, "to": 1.9, "steps": 39}
DEFAULT_OMEGA = {"from": 0.0, "to": 2.0, "steps": 401}
# 5 GHz resonators (L + Lc = 1 nH, C = 1 pF) with Cc/C = 1/2
DEFAULT_HARDWARE = {
    "L1": 0.95e-9,
    "L2": 0.95e-9,
    "Lc1": 0.05e-9,
    "Lc2": 0.05e-9,
    "C1": 1e-12,
    "C2": 1e-12,
    "Cc": 0.5e-12,
}

FORM_PARAMS = {
    "scaled": ("k_eff", "Delta", "qubit_detuning"),
    "circuit": ("Omega", "Omega1", "Omega2", "lambda1", "lambda2", "J"),
    "jt": ("omega1", "omega2", "k1", "k2", "qubit_frequency"),
}
# sweepable aliases on top of the plain parameter names
SCALED_ALIASES = ("J", "k")

TOP_KEYS = (
    "mode",
    "form",
    "params",
    "dissipation",
    "dims",
    "sweep",
    "sweep2",
    "omega",
    "eigen",
    "spectrum",
    "what",
    "hardware",
    "output",
    "jobs",
)
AXIS_KEYS = ("param", "from", "to", "steps")

ModelParams = Union[ScaledParams, CircuitParams, JTParams]


@dataclass(frozen=True)
class AxisSpec:
    """Inclusive linear grid; ``param`` is None for the omega axis."""

    start: float
    stop: float
    steps: int
    param: Optional[str] = None

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)

    def to_dict(self) -> Dict[str, Any]:
        d: Dict[str, Any] = {"from": self.start, "to": self.stop, "steps": self.steps}
        if self.param is not None:
            d["param"] = self.param
        return d


@dataclass(frozen=True)
class OutputSpec:
    path: Optional[str] = None
    format: str = "csv"


@dataclass(frozen=True)
class RunConfig:
    mode: str
    form: str = "scaled"
    params: Mapping[str, float] = field(default_factory=dict)
    dissipation: DissipationParams = field(default_factory=DissipationParams)
    dims: Tuple[int, int] = DEFAULT_DIMS
    sweep: Optional[AxisSpec] = None
    sweep2: Optional[AxisSpec] = None
    omega: AxisSpec = AxisSpec(0.0, 2.0, 401)
    eigen_count: int = DEFAULT_EIGEN_COUNT
    spectrum_method: str = "resolvent"
    what: str = "spectrum"
    hardware: Optional[HardwareParams] = None
    output: OutputSpec = field(default_factory=OutputSpec)
    jobs: int = 1

    def model_params(self, overrides: Optional[Mapping[str, float]] = None) -> ModelParams:
        """Parameters of the configured form with sweep overrides applied."""
        return build_model_params(self.form, self.params, overrides or {})

    def to_dict(self) -> Dict[str, Any]:
        """Plain document form; ``parse_config`` of it yields an equal RunConfig."""
        d: Dict[str, Any] = {
            "mode": self.mode,
            "form": self.form,
            "params": dict(self.params),
            "dissipation": self.dissipation.to_dict(),
            "dims": list(self.dims),
            "omega": self.omega.to_dict(),
            "eigen": {"count": self.eigen_count},
            "spectrum": {"method": self.spectrum_method},
            "what": self.what,
            "output": {"path": self.output.path, "format": self.output.format},
            "jobs": self.jobs,
        }
        if self.sweep is not None:
            d["sweep"] = self.sweep.to_dict()
        if self.sweep2 is not None:
            d["sweep2"] = self.sweep2.to_dict()
        if self.hardware is not None:
            d["hardware"] = self.hardware.to_dict()
        return d


def build_model_params(
    form: str, params: Mapping[str, float], overrides: Mapping[str, float]
) -> ModelParams:
    """Construct the parameter dataclass of `form`, resolving scaled-form aliases."""
    values = dict(params)
    for name, value in overrides.items():
        if form == "scaled" and name == "J":
            values["Delta"] = 2.0 * value
        elif form == "scaled" and name == "k":
            values["k_eff"] = math.sqrt(2.0) * value
        else:
            values[name] = value
    if form == "scaled":
        return ScaledParams(**values)
    if form == "circuit":
        return CircuitParams(**values)
    return JTParams(**values)


class _Loader(yaml.SafeLoader):
    """SafeLoader that also reads exponent floats without a dot (`1e-12`), as JSON writes them."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)[eE][-+]?[0-9]+$"),
    list("-+0123456789."),
)


class _Document:
    """Parsed YAML plus a map from dotted field path to 1-based line number."""

    def __init__(self, text: str):
        try:
            node = yaml.compose(text, Loader=_Loader)
            data = yaml.load(text, Loader=_Loader)
        except yaml.MarkedYAMLError as exc:
            mark = exc.problem_mark or exc.context_mark
            line = mark.line + 1 if mark is not None else None
            raise ConfigError(f"malformed document: {exc.problem}", line=line) from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed document: {exc}") from None
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError("top level of the config must be a mapping")
        self.data = data
        self.lines: Dict[str, int] = {}
        if node is not None:
            self._index(node, "")

    def _index(self, node, prefix: str) -> None:
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                path = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
                self.lines[path] = key_node.start_mark.line + 1
                self._index(value_node, path)

    def error(self, message: str, path: str) -> ConfigError:
        line = self.lines.get(path)
        if line is None and "." in path:
            line = self.lines.get(path.rsplit(".", 1)[0])
        return ConfigError(message, field=path, line=line)


def _section(doc: _Document, data: Mapping, key: str, allowed) -> Dict[str, Any]:
    value = data.get(key)
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise doc.error("expected a mapping", key)
    for k in value:
        if k not in allowed:
            raise doc.error(f"unknown key (allowed: {', '.join(allowed)})", f"{key}.{k}")
    return dict(value)


def _number(doc: _Document, value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise doc.error(f"expected a number, got {value!r}", path)
    if not math.isfinite(value):
        raise doc.error("must be finite", path)
    return float(value)


def _integer(doc: _Document, value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise doc.error(f"expected an integer, got {value!r}", path)
    return value


def _choice(doc: _Document, value, choices, path: str) -> str:
    if value not in choices:
        raise doc.error(f"must be one of {', '.join(choices)}, got {value!r}", path)
    return value


def _dims(doc: _Document, value, path: str = "dims") -> Tuple[int, int]:
    if isinstance(value, str):
        try:
            value = [int(part) for part in value.split(",")]
        except ValueError:
            raise doc.error(f"expected 'd1,d2', got {value!r}", path) from None
    elif isinstance(value, int) and not isinstance(value, bool):
        value = [value, value]
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise doc.error("expected two mode dimensions [d1, d2]", path)
    dims = tuple(_integer(doc, v, path) for v in value)
    for d in dims:
        if not MIN_DIM <= d <= MAX_DIM:
            raise doc.error(
                f"mode dimension {d} outside [{MIN_DIM}, {MAX_DIM}] "
                f"(dense superoperator guardrail)",
                path,
            )
    return dims  # type: ignore[return-value]


def _axis(doc: _Document, raw: Dict[str, Any], path: str, needs_param: bool) -> AxisSpec:
    for key in ("from", "to", "steps"):
        if key not in raw:
            raise doc.error("missing required key", f"{path}.{key}")
    start = _number(doc, raw["from"], f"{path}.from")
    stop = _number(doc, raw["to"], f"{path}.to")
    steps = _integer(doc, raw["steps"], f"{path}.steps")
    if steps < 2:
        raise doc.error(f"steps must be >= 2, got {steps}", f"{path}.steps")
    if not start < stop:
        raise doc.error(f"'from' ({start}) must be < 'to' ({stop})", f"{path}.from")
    param = raw.get("param")
    if needs_param and not isinstance(param, str):
        raise doc.error("missing sweep parameter name", f"{path}.param")
    if not needs_param and param is not None:
        raise doc.error("the omega axis takes no parameter name", f"{path}.param")
    return AxisSpec(start=start, stop=stop, steps=steps, param=param)


def _check_sweep_param(doc: _Document, form: str, axis: AxisSpec, path: str) -> None:
    allowed = FORM_PARAMS[form] + (SCALED_ALIASES if form == "scaled" else ())
    if axis.param not in allowed:
        raise doc.error(
            f"cannot sweep {axis.param!r} in form {form!r} (allowed: {', '.join(allowed)})",
            f"{path}.param",
        )


def _merge(data: Dict[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    merged = dict(data)
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "output" and isinstance(value, dict):
            section = dict(merged.get("output") or {})
            section.update({k: v for k, v in value.items() if v is not None})
            merged["output"] = section
        else:
            merged[key] = value
    return merged


def parse_config(
    text: str, mode: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None
) -> RunConfig:
    """
    Resolve a YAML config document into a RunConfig.

    Args:
        text: The document (empty string for pure defaults)
        mode: Subcommand name; must agree with a ``mode`` key in the document
        overrides: Values taking precedence over the document, keyed like the
            document (``dims``, ``jobs``, ``output``, ``what``, ``spectrum``)

    Returns:
        Fully resolved RunConfig with reference defaults applied

    Raises:
        ConfigError: malformed document, unknown key or invariant violation
    """
    doc = _Document(text)
    for key in doc.data:
        if key not in TOP_KEYS:
            raise doc.error(f"unknown key (allowed: {', '.join(TOP_KEYS)})", str(key))
    data = _merge(doc.data, overrides or {})

    doc_mode = data.get("mode")
    if mode is not None and doc_mode is not None and doc_mode != mode:
        raise doc.error(f"config is for mode {doc_mode!r}, not {mode!r}", "mode")
    mode = _choice(doc, mode or doc_mode, MODES, "mode")
    form = _choice(doc, data.get("form", "scaled"), FORMS, "form")

    raw_params = _section(doc, data, "params", FORM_PARAMS[form])
    params = {k: _number(doc, v, f"params.{k}") for k, v in raw_params.items()}
    if form == "scaled":
        params = {**DEFAULT_SCALED, **params}

    raw_diss = _section(doc, data, "dissipation", ("kappa", "gamma", "gamma_phi", "n_th"))
    diss_values = {k: _number(doc, v, f"dissipation.{k}") for k, v in raw_diss.items()}
    try:
        dissipation = DissipationParams(**diss_values)
    except ParameterError as exc:
        raise doc.error(exc.message, f"dissipation.{exc.field}") from None

    dims = _dims(doc, data["dims"]) if data.get("dims") is not None else DEFAULT_DIMS

    sweep = sweep2 = None
    if data.get("sweep") is not None:
        sweep = _axis(doc, _section(doc, data, "sweep", AXIS_KEYS), "sweep", True)
    if data.get("sweep2") is not None:
        sweep2 = _axis(doc, _section(doc, data, "sweep2", AXIS_KEYS), "sweep2", True)
    if sweep is None and mode == "eigens" and form == "scaled":
        sweep = AxisSpec(
            start=DEFAULT_BAND_SWEEP["from"],
            stop=DEFAULT_BAND_SWEEP["to"],
            steps=DEFAULT_BAND_SWEEP["steps"],
            param=DEFAULT_BAND_SWEEP["param"],
        )
    if sweep2 is not None and sweep is None:
        raise doc.error("sweep2 requires sweep", "sweep2")
    if mode in ("eigens", "sweep") and sweep is None:
        raise doc.error(f"mode {mode!r} requires a sweep section", "sweep")
    for axis, path in ((sweep, "sweep"), (sweep2, "sweep2")):
        if axis is not None:
            _check_sweep_param(doc, form, axis, path)
    if sweep is not None and sweep2 is not None and sweep.param == sweep2.param:
        raise doc.error("sweep and sweep2 must vary different parameters", "sweep2.param")

    raw_omega = _section(doc, data, "omega", ("from", "to", "steps"))
    omega = _axis(doc, {**DEFAULT_OMEGA, **raw_omega}, "omega", False)

    eigen = _section(doc, data, "eigen", ("count",))
    eigen_count = _integer(doc, eigen.get("count", DEFAULT_EIGEN_COUNT), "eigen.count")
    total = 2 * dims[0] * dims[1]
    if not 1 <= eigen_count <= total:
        raise doc.error(f"count must be in [1, {total}]", "eigen.count")

    spectrum = _section(doc, data, "spectrum", ("method",))
    method = _choice(doc, spectrum.get("method", "resolvent"), METHODS, "spectrum.method")
    what = _choice(doc, data.get("what", "spectrum"), SWEEP_TARGETS, "what")
    if sweep2 is not None and (mode == "spectrum" or (mode == "sweep" and what == "spectrum")):
        raise doc.error("spectral maps take a single sweep axis", "sweep2")

    hardware = None
    if mode == "hardware" or data.get("hardware") is not None:
        raw_hw = _section(doc, data, "hardware", tuple(DEFAULT_HARDWARE))
        hw_values = {k: _number(doc, v, f"hardware.{k}") for k, v in raw_hw.items()}
        try:
            hardware = HardwareParams(**{**DEFAULT_HARDWARE, **hw_values})
        except ParameterError as exc:
            raise doc.error(exc.message, f"hardware.{exc.field}") from None

    out = _section(doc, data, "output", ("path", "format"))
    path = out.get("path")
    if path is not None and not isinstance(path, str):
        raise doc.error("expected a file path", "output.path")
    output = OutputSpec(path=path, format=_choice(doc, out.get("format", "csv"), FORMATS, "output.format"))

    jobs = _integer(doc, data.get("jobs", 1), "jobs")
    if jobs < 1:
        raise doc.error(f"jobs must be >= 1, got {jobs}", "jobs")

    cfg = RunConfig(
        mode=mode,
        form=form,
        params=params,
        dissipation=dissipation,
        dims=dims,
        sweep=sweep,
        sweep2=sweep2,
        omega=omega,
        eigen_count=eigen_count,
        spectrum_method=method,
        what=what,
        hardware=hardware,
        output=output,
        jobs=jobs,
    )
    if mode != "hardware":
        _check_model(doc, cfg)
    return cfg


def _check_model(doc: _Document, cfg: RunConfig) -> None:
    """Build the model parameters at every sweep corner so invariant violations surface early."""
    corners = [{}]
    for axis in (cfg.sweep, cfg.sweep2):
        if axis is not None:
            corners = [
                {**c, axis.param: v} for c in corners for v in (axis.start, axis.stop)
            ]
    for overrides in corners:
        try:
            cfg.model_params(overrides)
        except TypeError as exc:
            raise doc.error(f"incomplete parameters for form {cfg.form!r}: {exc}", "params") from None
        except ParameterError as exc:
            where = f"params.{exc.field}" if exc.field else "params"
            suffix = f" (at sweep point {overrides})" if overrides else ""
            raise doc.error(exc.message + suffix, where) from None


def load_config(path: Optional[str], mode: Optional[str] = None, **overrides) -> RunConfig:
    """Read `path` (or use pure defaults when None) and resolve it."""
    text = ""
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}", field=path) from None
    return parse_config(text, mode=mode, overrides=overrides)
