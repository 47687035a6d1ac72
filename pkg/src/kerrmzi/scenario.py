"""Sweep scenarios: INI parsing, validation and row evaluation.

A scenario file has the sections ``[scenario]``, ``[input]``, ``[circuit]``,
``[detection]``, ``[scan]`` and ``[output]``.  Exactly one quantity is swept;
any other list-valued setting multiplies the set of series, and every
observable column gets a suffix naming its series.
"""

from __future__ import annotations

import ast
import configparser
import itertools
import math
import operator
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import TruncationError, UndefinedG2, ZeroInformation
from .fockspace import ModeA, ModeB, ModeSelector
from .inputs import DEFAULT_TAIL_TOLERANCE, InputKind, InputSpec, build_input, required_cutoff
from .interferometer import CircuitSpec, LossStage, MZIKind, run_circuit, state_after_second_bs
from .metrology import (
    SCHEMES,
    PhaseProbe,
    cramer_rao_minimum,
    maximize_over_phase,
    min_phase_error_scan,
    phase_error_from_parity,
    qfi,
)
from .witnesses import compute_moments, g2_zero, hillery_zubairy, shchukin_vogel

SWEEP_COLUMNS = {
    "phi": "phi_rad",
    "chi": "chi_rad",
    "nbar": "nbar",
    "eta_det": "eta_det",
    "eta_loss": "eta_loss",
}
OBSERVABLES = {
    "parity": ("parity",),
    "dphi": ("dphi",),
    "dphi_parity_min": ("dphi_parity_min",),
    "fisher": tuple(f"F_{s}" for s in SCHEMES),
    "fisher_max": tuple(f"F_{s}_max" for s in SCHEMES),
    "qfi": ("F_Q",),
    "dphi_min": ("dphi_min",),
    "witnesses": ("E_HZ", "E_SV", "g2_a", "g2_b"),
    "deficit": ("deficit",),
}
REFERENCES = ("SQL", "HL", "F_SQL", "F_HL")
DEFAULT_MAX_N_MAX = 600


class ConfigError(Exception):
    """Malformed configuration (exit code 2)."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class DomainError(Exception):
    """Well-formed configuration with out-of-range values (exit code 3)."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


# value parsing --------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _eval_node(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    raise ValueError("unsupported expression")


def parse_number(text: str, key: str) -> float:
    """A float or simple arithmetic in ``pi`` such as ``pi/2``, ``3*pi/4`` or ``-pi/10``."""
    src = text.strip().replace("π", "pi")
    try:
        value = _eval_node(ast.parse(src, mode="eval").body)
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise ConfigError(key, f"cannot parse {text!r} as a number") from None
    if not math.isfinite(value):
        raise ConfigError(key, f"{text!r} is not finite")
    return value


def parse_list(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def parse_numbers(text: str, key: str) -> list[float]:
    items = parse_list(text)
    if not items:
        raise ConfigError(key, "empty value")
    return [parse_number(item, key) for item in items]


def parse_int(text: str, key: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(key, f"cannot parse {text!r} as an integer") from None


def parse_bool(text: str, key: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(key, f"cannot parse {text!r} as a boolean")


# scenario -------------------------------------------------------------------

@dataclass(frozen=True)
class StateChoice:
    kind: InputKind
    value: float | None = None
    weights: tuple[float, ...] = ()

    def spec(self, nbar: float | None, tail_tolerance: float) -> InputSpec:
        value = self.value if nbar is None else nbar
        if self.kind is InputKind.MIXTURE:
            return InputSpec.mixture(self.weights, tail_tolerance)
        if self.kind is InputKind.NUMBER:
            if value != int(value):
                raise DomainError("nbar", f"number input needs an integer photon number, got {value!r}")
            return InputSpec.number(int(value), tail_tolerance)
        if self.kind is InputKind.COHERENT:
            return InputSpec.coherent(value, tail_tolerance)
        return InputSpec.thermal(value, tail_tolerance)

    def label(self) -> str:
        if self.kind is InputKind.MIXTURE:
            return "mixture"
        if self.value is None:
            return self.kind.value
        return f"{self.kind.value}{self.value:g}"


@dataclass(frozen=True)
class Scenario:
    name: str
    sweep: str
    start: float
    stop: float
    points: int
    endpoint: bool
    states: tuple[StateChoice, ...]
    kinds: tuple[MZIKind, ...]
    chi: tuple[float, ...] = (math.pi / 2,)
    phi: tuple[float, ...] = (0.0,)
    eta_loss: tuple[float, ...] = (0.0,)
    eta_det: tuple[float, ...] = (1.0,)
    loss_mode: ModeSelector = ModeA
    loss_stage: LossStage = LossStage.AFTER_SECOND_BS
    single_mode: ModeSelector = ModeB
    tail_tolerance: float = DEFAULT_TAIL_TOLERANCE
    n_max: int | None = None
    max_n_max: int = DEFAULT_MAX_N_MAX
    scan_start: float = 0.0
    scan_stop: float = math.pi
    scan_points: int = 361
    observables: tuple[str, ...] = ("parity",)
    references: tuple[str, ...] = ()
    witness_stage: str = "after_second_bs"
    description: str = ""

    def sweep_values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points, endpoint=self.endpoint)

    def scan_grid(self) -> np.ndarray:
        return np.linspace(self.scan_start, self.scan_stop, self.scan_points)

    def series(self) -> list["Series"]:
        axes = {
            "state": self.states,
            "kind": self.kinds,
            "chi": self.chi,
            "phi": self.phi,
            "eta_loss": self.eta_loss,
            "eta_det": self.eta_det,
        }
        if self.sweep in axes:
            axes[self.sweep] = axes[self.sweep][:1]
        varying = [k for k, v in axes.items() if len(v) > 1]
        out = []
        for combo in itertools.product(*axes.values()):
            values = dict(zip(axes, combo))
            parts = []
            for k in varying:
                v = values[k]
                if k == "state":
                    parts.append(v.label())
                elif k == "kind":
                    parts.append(v.value)
                else:
                    parts.append(f"{k}{v:.6g}")
            out.append(Series("_".join(parts), **values))
        return out

    def columns(self) -> list[str]:
        cols = [SWEEP_COLUMNS[self.sweep]]
        for obs in self.observables:
            for s in self.series():
                cols.extend(f"{base}_{s.suffix}" if s.suffix else base for base in OBSERVABLES[obs])
        labels = self._reference_labels()
        for ref in self.references:
            cols.extend(f"{ref}_{lab}" if lab else ref for lab in labels)
        return cols

    def _reference_labels(self) -> list[str]:
        if self.sweep == "nbar":
            return [""]
        means = {st.spec(None, self.tail_tolerance).mean for st in self.states}
        if len(means) == 1:
            return [""]
        return [st.label() for st in self.states]

    def input_specs(self, nbar: float | None = None) -> list[InputSpec]:
        return [st.spec(nbar, self.tail_tolerance) for st in self.states]

    def resolved_cutoffs(self) -> dict[str, int]:
        """Largest cutoff each input needs anywhere on the sweep."""
        nbars = list(self.sweep_values()) if self.sweep == "nbar" else [None]
        out: dict[str, int] = {}
        for st in self.states:
            need = 0
            for nb in nbars:
                spec = st.spec(nb, self.tail_tolerance)
                if self.n_max is not None:
                    if spec.tail_mass(self.n_max) >= self.tail_tolerance:
                        raise TruncationError(
                            f"n_max: cutoff {self.n_max} leaves tail {spec.tail_mass(self.n_max):.3g} "
                            f"for {spec.label()} (tail_tolerance {self.tail_tolerance:g})")
                    need = self.n_max
                else:
                    need = max(need, required_cutoff(spec))
            if need > self.max_n_max:
                raise TruncationError(f"max_n_max: {st.label()} needs cutoff {need} > {self.max_n_max}")
            out[st.label()] = need
        return out


@dataclass(frozen=True)
class Series:
    suffix: str
    state: StateChoice
    kind: MZIKind
    chi: float
    phi: float
    eta_loss: float
    eta_det: float


def _get(cp: configparser.ConfigParser, section: str, key: str, default=None):
    if cp.has_option(section, key):
        return cp.get(section, key)
    return default


def _parse_state(item: str, key: str) -> StateChoice:
    name, _, value = item.partition(":")
    try:
        kind = InputKind(name.strip().lower())
    except ValueError:
        raise ConfigError(key, f"unknown input kind {name.strip()!r}") from None
    value = value.strip()
    if kind is InputKind.MIXTURE:
        if not value:
            raise ConfigError(key, "mixture needs weights, e.g. mixture:0.5/0.5")
        return StateChoice(kind, weights=tuple(parse_number(w, key) for w in value.split("/")))
    if not value:
        return StateChoice(kind)
    return StateChoice(kind, parse_number(value, key))


def _require(cp, section, key):
    value = _get(cp, section, key)
    if value is None:
        raise ConfigError(key, f"missing in [{section}]")
    return value


def parse_scenario(text: str) -> Scenario:
    """Parse and validate scenario text; raises :class:`ConfigError` or :class:`DomainError`."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("config", str(exc).splitlines()[0]) from None
    if not cp.sections():
        raise ConfigError("config", "no sections found")

    sweep = _require(cp, "scenario", "sweep").strip().lower()
    if sweep not in SWEEP_COLUMNS:
        raise ConfigError("sweep", f"unknown sweep axis {sweep!r}; choose from {sorted(SWEEP_COLUMNS)}")
    kw: dict = {
        "name": _get(cp, "scenario", "name", "scenario").strip(),
        "description": _get(cp, "scenario", "description", "").strip(),
        "sweep": sweep,
        "start": parse_number(_require(cp, "scenario", "start"), "start"),
        "stop": parse_number(_require(cp, "scenario", "stop"), "stop"),
        "points": parse_int(_require(cp, "scenario", "points"), "points"),
        "endpoint": parse_bool(_get(cp, "scenario", "endpoint", "true"), "endpoint"),
    }
    states = [_parse_state(s, "states") for s in parse_list(_require(cp, "input", "states"))]
    if not states:
        raise ConfigError("states", "empty value")
    kw["states"] = tuple(states)
    kw["tail_tolerance"] = parse_number(_get(cp, "input", "tail_tolerance", repr(DEFAULT_TAIL_TOLERANCE)),
                                        "tail_tolerance")
    if _get(cp, "input", "n_max") is not None:
        kw["n_max"] = parse_int(_get(cp, "input", "n_max"), "n_max")
    if _get(cp, "input", "max_n_max") is not None:
        kw["max_n_max"] = parse_int(_get(cp, "input", "max_n_max"), "max_n_max")

    try:
        kw["kinds"] = tuple(MZIKind.parse(k) for k in parse_list(_get(cp, "circuit", "kind", "SK")))
    except ValueError:
        raise ConfigError("kind", "expected SK and/or CK") from None
    for key in ("chi", "phi", "eta_loss"):
        if _get(cp, "circuit", key) is not None:
            kw[key] = tuple(parse_numbers(_get(cp, "circuit", key), key))
    if _get(cp, "detection", "eta_det") is not None:
        kw["eta_det"] = tuple(parse_numbers(_get(cp, "detection", "eta_det"), "eta_det"))
    try:
        kw["loss_mode"] = ModeSelector.parse(_get(cp, "circuit", "loss_mode", "a"))
    except ValueError:
        raise ConfigError("loss_mode", "expected a or b") from None
    try:
        kw["loss_stage"] = LossStage(_get(cp, "circuit", "loss_stage", "after_second_bs").strip())
    except ValueError:
        raise ConfigError("loss_stage", f"expected one of {[s.value for s in LossStage]}") from None
    try:
        kw["single_mode"] = ModeSelector.parse(_get(cp, "detection", "single_mode", "b"))
    except ValueError:
        raise ConfigError("single_mode", "expected a or b") from None

    kw["scan_start"] = parse_number(_get(cp, "scan", "start", "0"), "scan.start")
    kw["scan_stop"] = parse_number(_get(cp, "scan", "stop", "pi"), "scan.stop")
    kw["scan_points"] = parse_int(_get(cp, "scan", "points", "361"), "scan.points")

    obs = tuple(o.lower() for o in parse_list(_get(cp, "output", "observables", "parity")))
    for o in obs:
        if o not in OBSERVABLES:
            raise ConfigError("observables", f"unknown observable {o!r}; choose from {sorted(OBSERVABLES)}")
    refs = tuple(parse_list(_get(cp, "output", "references", "")))
    for r in refs:
        if r not in REFERENCES:
            raise ConfigError("references", f"unknown reference {r!r}; choose from {list(REFERENCES)}")
    kw["observables"], kw["references"] = obs, refs
    kw["witness_stage"] = _get(cp, "output", "witness_stage", "after_second_bs").strip()
    if kw["witness_stage"] not in ("after_second_bs", "output"):
        raise ConfigError("witness_stage", "expected after_second_bs or output")

    scenario = Scenario(**kw)
    validate_scenario(scenario)
    return scenario


def validate_scenario(sc: Scenario) -> None:
    if sc.points < 2:
        raise DomainError("points", f"need at least 2 sweep points, got {sc.points}")
    if sc.scan_points < 2:
        raise DomainError("scan.points", f"need at least 2 scan points, got {sc.scan_points}")
    if not sc.stop > sc.start:
        raise DomainError("stop", "sweep stop must exceed start")
    if not 0.0 < sc.tail_tolerance < 1.0:
        raise DomainError("tail_tolerance", "must lie in (0, 1)")
    if sc.n_max is not None and sc.n_max < 0:
        raise DomainError("n_max", "must be non-negative")

    def unit_interval(key, values):
        for v in values:
            if not 0.0 <= v <= 1.0:
                raise DomainError(key, f"{v!r} outside [0, 1]")

    unit_interval("eta_det", sc.eta_det)
    unit_interval("eta_loss", sc.eta_loss)
    if sc.sweep in ("eta_det", "eta_loss"):
        unit_interval(sc.sweep, (sc.start, sc.stop))
    if sc.sweep == "nbar" and sc.start < 0:
        raise DomainError("nbar", "mean photon number must be non-negative")
    for st in sc.states:
        if sc.sweep == "nbar":
            if st.value is not None or st.kind is InputKind.MIXTURE:
                raise DomainError("states", "an nbar sweep takes bare input kinds such as 'thermal'")
            if st.kind is InputKind.NUMBER:
                vals = sc.sweep_values()
                if np.any(vals != np.round(vals)):
                    raise DomainError("nbar", "number input needs integer sweep values")
            continue
        if st.kind is InputKind.MIXTURE:
            w = np.asarray(st.weights)
            if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
                raise DomainError("states", "mixture weights must be non-negative and sum to 1")
            continue
        if st.value is None:
            raise ConfigError("states", f"{st.kind.value} needs a value, e.g. {st.kind.value}:5")
        if st.value < 0:
            raise DomainError("states", f"negative photon number {st.value!r}")
        if st.kind is InputKind.NUMBER and st.value != int(st.value):
            raise DomainError("states", f"number input needs an integer, got {st.value!r}")
    needs_phi = {"parity", "dphi", "fisher"} & set(sc.observables)
    if needs_phi and sc.sweep != "phi" and len(sc.phi) == 0:
        raise DomainError("phi", "phase-resolved observables need a phi value")


def resolved_settings(sc: Scenario) -> dict:
    """Every setting after defaults, as JSON-friendly values."""
    return {
        "name": sc.name,
        "sweep": sc.sweep,
        "start": sc.start,
        "stop": sc.stop,
        "points": sc.points,
        "endpoint": sc.endpoint,
        "states": [st.label() for st in sc.states],
        "kinds": [k.value for k in sc.kinds],
        "chi": list(sc.chi),
        "phi": list(sc.phi),
        "eta_loss": list(sc.eta_loss),
        "eta_det": list(sc.eta_det),
        "loss_mode": sc.loss_mode.value,
        "loss_stage": sc.loss_stage.value,
        "single_mode": sc.single_mode.value,
        "tail_tolerance": sc.tail_tolerance,
        "n_max": sc.n_max,
        "max_n_max": sc.max_n_max,
        "scan": {"start": sc.scan_start, "stop": sc.scan_stop, "points": sc.scan_points},
        "observables": list(sc.observables),
        "references": list(sc.references),
        "witness_stage": sc.witness_stage,
    }


# evaluation -----------------------------------------------------------------

@lru_cache(maxsize=64)
def _input_state(spec: InputSpec, n_max: int):
    return build_input(spec, n_max)


@lru_cache(maxsize=16)
def _probe(spec: InputSpec, n_max: int, circuit: CircuitSpec) -> PhaseProbe:
    return PhaseProbe(_input_state(spec, n_max), circuit)


def _point_settings(sc: Scenario, s: Series, x: float):
    values = {"chi": s.chi, "phi": s.phi, "eta_loss": s.eta_loss, "eta_det": s.eta_det}
    nbar = None
    if sc.sweep == "nbar":
        nbar = x
    else:
        values[sc.sweep] = x
    spec = s.state.spec(nbar, sc.tail_tolerance)
    n_max = sc.n_max if sc.n_max is not None else required_cutoff(spec)
    circuit = CircuitSpec(s.kind, values["chi"], 0.0, values["eta_loss"], loss_mode=sc.loss_mode,
                          loss_stage=sc.loss_stage)
    return spec, n_max, circuit, values["phi"], values["eta_det"]


def _observable(sc: Scenario, obs: str, spec: InputSpec, n_max: int, circuit: CircuitSpec,
                phi: float, eta_det: float) -> list[float]:
    if obs in ("parity", "dphi"):
        par, dpar = _probe(spec, n_max, circuit).parity(phi, eta_det)
        return [par] if obs == "parity" else [float(phase_error_from_parity(par, dpar))]
    if obs == "dphi_parity_min":
        probe = _probe(spec, n_max, circuit)
        grid = sc.scan_grid()
        curve = [phase_error_from_parity(*probe.parity(p, eta_det)) for p in grid]
        return [min_phase_error_scan(grid, curve)[0]]
    if obs == "fisher":
        f = _probe(spec, n_max, circuit).fisher(phi, eta_det, sc.single_mode)
        return [f[s] for s in SCHEMES]
    if obs == "fisher_max":
        probe = _probe(spec, n_max, circuit)
        return [maximize_over_phase(lambda p, s=s: probe.fisher(p, eta_det, sc.single_mode, (s,))[s],
                                    sc.scan_grid())[0] for s in SCHEMES]
    if obs in ("qfi", "dphi_min"):
        f_q = qfi(_input_state(spec, n_max), circuit)
        if obs == "qfi":
            return [f_q]
        try:
            return [cramer_rao_minimum(f_q)]
        except ZeroInformation:
            return [math.inf]
    if obs == "witnesses":
        state = _input_state(spec, n_max)
        if sc.witness_stage == "output":
            state = run_circuit(state, circuit.with_phi(phi))
        else:
            state = state_after_second_bs(state, circuit)
        m = compute_moments(state)
        g2 = []
        for mode in (ModeA, ModeB):
            try:
                g2.append(g2_zero(state, mode))
            except UndefinedG2:
                g2.append(math.nan)
        return [hillery_zubairy(m), shchukin_vogel(m), *g2]
    if obs == "deficit":
        return [_input_state(spec, n_max).deficit]
    raise ValueError(obs)


def evaluate_row(sc: Scenario, index: int) -> list[float]:
    """All column values at sweep point ``index`` (sweep value first)."""
    x = float(sc.sweep_values()[index])
    row = [x]
    for obs in sc.observables:
        for s in sc.series():
            spec, n_max, circuit, phi, eta_det = _point_settings(sc, s, x)
            row.extend(_observable(sc, obs, spec, n_max, circuit, phi, eta_det))
    labels = sc._reference_labels()
    for ref in sc.references:
        for lab, st in zip(labels, sc.states):
            nbar = x if sc.sweep == "nbar" else st.spec(None, sc.tail_tolerance).mean
            row.append(_reference(ref, nbar))
    return row


def _reference(ref: str, nbar: float) -> float:
    if ref == "F_SQL":
        return nbar
    if ref == "F_HL":
        return nbar * nbar
    if nbar <= 0:
        return math.inf
    return 1.0 / math.sqrt(nbar) if ref == "SQL" else 1.0 / nbar


def memory_estimate(n_max: int) -> int:
    """Bytes for one full set of complex sector blocks up to ``n_max``."""
    return 16 * sum((n + 1) ** 2 for n in range(n_max + 1))

