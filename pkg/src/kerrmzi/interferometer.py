"""Kerr-nonlinear Mach-Zehnder interferometer with optional loss in one arm.

Element order (right to left in operator notation)::

    BS -> PS(pi/2, a) -> Kerr(chi) -> BS -> [loss] -> PS(phi, a) -> BS

The loss element sits after the second beamsplitter by default;
:class:`LossStage` moves it earlier for sensitivity studies.

Everything before ``PS(phi)`` is independent of the phase being estimated;
:func:`state_before_phase` exposes that part so phase sweeps reuse it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from . import _core
from .fockspace import (
    ModeA,
    ModeSelector,
    SectorDensity,
    SectorState,
    State,
    apply_beamsplitter,
    apply_cross_kerr,
    apply_phase_shift,
    apply_self_kerr,
)


class MZIKind(enum.Enum):
    SK = "SK"
    CK = "CK"

    @classmethod
    def parse(cls, value: "MZIKind | str") -> "MZIKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper()
        aliases = {"SELFKERR": "SK", "SELF-KERR": "SK", "CROSSKERR": "CK", "CROSS-KERR": "CK"}
        return cls(aliases.get(key, key))


class Tap(enum.Enum):
    NONE = "none"
    AFTER_SECOND_BS = "after_second_bs"
    BEFORE_FINAL_BS = "before_final_bs"


class LossStage(enum.Enum):
    AFTER_FIRST_BS = "after_first_bs"
    AFTER_KERR = "after_kerr"
    AFTER_SECOND_BS = "after_second_bs"


@dataclass(frozen=True)
class CircuitSpec:
    """Interferometer settings.

    ``tap`` stops :func:`run_circuit` early and returns the intermediate state.
    """

    kind: MZIKind
    chi: float
    phi: float = 0.0
    eta_loss: float = 0.0
    tap: Tap = Tap.NONE
    loss_mode: ModeSelector = ModeA
    loss_stage: LossStage = LossStage.AFTER_SECOND_BS

    def __post_init__(self):
        object.__setattr__(self, "kind", MZIKind.parse(self.kind))
        object.__setattr__(self, "loss_stage", LossStage(self.loss_stage))
        object.__setattr__(self, "loss_mode", ModeSelector.parse(self.loss_mode))
        if not (math.isfinite(self.chi) and math.isfinite(self.phi)):
            raise ValueError("chi and phi must be finite")
        if not 0.0 <= self.eta_loss <= 1.0:
            raise ValueError(f"eta_loss must lie in [0, 1], got {self.eta_loss}")

    def with_phi(self, phi: float) -> "CircuitSpec":
        return replace(self, phi=float(phi))


@dataclass(frozen=True)
class LossChannel:
    """Pure-loss channel (fictitious beamsplitter of reflectivity ``1 - transmission``)."""

    transmission: float
    mode: ModeSelector = ModeA

    def __post_init__(self):
        object.__setattr__(self, "mode", ModeSelector.parse(self.mode))
        if not 0.0 <= self.transmission <= 1.0:
            raise ValueError(f"transmission must lie in [0, 1], got {self.transmission}")

    @classmethod
    def from_loss(cls, eta_loss: float, mode: ModeSelector = ModeA) -> "LossChannel":
        return cls(1.0 - eta_loss, mode)


def _kerr(state: State, spec: CircuitSpec) -> State:
    if spec.kind is MZIKind.SK:
        return apply_self_kerr(state, spec.chi)
    return apply_cross_kerr(state, spec.chi)


def _loss_at(state: State, spec: CircuitSpec, stage: LossStage) -> State:
    if spec.eta_loss > 0.0 and spec.loss_stage is stage:
        return apply_arm_loss(state, LossChannel.from_loss(spec.eta_loss, spec.loss_mode))
    return state


def state_after_second_bs(state: State, spec: CircuitSpec) -> State:
    """``U_BS Kerr(chi) U_PS(pi/2) U_BS`` applied to the input (phi-independent).

    Loss placed at an earlier stage is included; the default placement is not.
    """
    state = _loss_at(apply_beamsplitter(state), spec, LossStage.AFTER_FIRST_BS)
    state = apply_phase_shift(state, math.pi / 2, ModeA)
    state = _loss_at(_kerr(state, spec), spec, LossStage.AFTER_KERR)
    return apply_beamsplitter(state)


def state_before_phase(state: State, spec: CircuitSpec) -> State:
    """State entering ``PS(phi)``, including the arm loss wherever it sits."""
    return _loss_at(state_after_second_bs(state, spec), spec, LossStage.AFTER_SECOND_BS)


def run_circuit(state: State, spec: CircuitSpec) -> State:
    """Propagate ``state`` through the interferometer (or up to ``spec.tap``)."""
    if spec.tap is Tap.AFTER_SECOND_BS:
        return state_after_second_bs(state, spec)
    state = apply_phase_shift(state_before_phase(state, spec), spec.phi, ModeA)
    if spec.tap is Tap.BEFORE_FINAL_BS:
        return state
    return apply_beamsplitter(state)


def loss_amplitudes(n_max: int, transmission: float) -> np.ndarray:
    """``c[m, j] = sqrt(C(m, j) t^(m-j) (1-t)^j)``: amplitude to lose ``j`` of ``m`` photons."""
    m = np.arange(n_max + 1)[:, None]
    j = np.arange(n_max + 1)[None, :]
    return np.sqrt(stats.binom.pmf(j, m, 1.0 - transmission))


def apply_arm_loss(state: State, channel: LossChannel) -> SectorDensity:
    """Pure-loss channel on one mode in Kraus form.

    Sector ``n`` feeds sectors ``n - j``.  A :class:`SectorState` input is
    first reduced to its block-diagonal part, so inter-sector coherences are
    not carried through the loss.
    """
    density = state.to_density() if isinstance(state, SectorState) else state
    if channel.transmission == 1.0:
        return density
    n_max = density.n_max
    coeff = loss_amplitudes(n_max, channel.transmission)
    on_a = channel.mode is ModeA
    incoming: list[list[np.ndarray]] = [[] for _ in range(n_max + 1)]
    for n, f in enumerate(density.factors):
        if f.shape[1] == 0:
            continue
        branches = _core.kraus_branches(f, coeff, on_a)
        for j in range(n + 1):
            incoming[n - j].append(branches[j, : n + 1 - j])
    facs = [np.concatenate(cols, axis=1) if cols else np.zeros((m + 1, 0), dtype=complex)
            for m, cols in enumerate(incoming)]
    return SectorDensity(tuple(facs), density.deficit).compressed()
