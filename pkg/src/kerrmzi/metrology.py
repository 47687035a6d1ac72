"""Phase-estimation figures of merit: parity phase error, classical and quantum Fisher information."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from . import _core
from .detection import difference_of_table, parity_of_table, smear_table, count_table
from .errors import DerivativeMismatchError, UnsupportedChi, ZeroInformation
from .fockspace import (
    ModeA,
    ModeB,
    ModeSelector,
    SectorDensity,
    SectorState,
    State,
    apply_phase_shift,
    mode_number_moments,
    photons_in_mode,
)
from .inputs import InputKind, InputSpec, build_input
from .interferometer import CircuitSpec, MZIKind, run_circuit, state_before_phase

SCHEMES = ("single", "difference", "joint", "parity")
PROBABILITY_FLOOR = 1e-14
STATIONARY_SLOPE = 1e-12
EIGEN_FLOOR = 1e-12
DEFAULT_FD_STEP = 1e-5


def phase_error_from_parity(parity, dparity):
    """``sqrt(1 - <Pi>^2) / |d<Pi>/dphi|``; ``inf`` where the slope vanishes."""
    parity = np.asarray(parity, dtype=float)
    slope = np.abs(np.asarray(dparity, dtype=float))
    num = np.sqrt(np.clip(1.0 - parity ** 2, 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(slope < STATIONARY_SLOPE, np.inf, num / np.where(slope == 0, 1.0, slope))
    return out if out.ndim else float(out)


class FisherValue(NamedTuple):
    value: float
    skipped: int


def classical_fisher(p, dp, dp_check=None, rtol: float = 1e-5) -> FisherValue:
    """``sum (dp)^2 / p`` over outcomes with ``p >= 1e-14``.

    If ``dp_check`` (e.g. a finite-difference derivative) is given it must
    agree with ``dp`` to ``rtol`` relative to ``max|dp|``.
    """
    p = np.asarray(p, dtype=float).ravel()
    dp = np.asarray(dp, dtype=float).ravel()
    if dp_check is not None:
        dp_check = np.asarray(dp_check, dtype=float).ravel()
        scale = max(np.max(np.abs(dp)), np.finfo(float).tiny)
        err = np.max(np.abs(dp - dp_check)) / scale
        if err > rtol:
            raise DerivativeMismatchError(f"derivatives differ by {err:.3g} (relative), tolerance {rtol:g}")
    keep = p >= PROBABILITY_FLOOR
    return FisherValue(float(np.sum(dp[keep] ** 2 / p[keep])), int(np.count_nonzero(~keep & (dp != 0))))


def _scheme_outcomes(P: np.ndarray, D: np.ndarray, scheme: str, single_mode: ModeSelector):
    if scheme == "joint":
        return P.ravel(), D.ravel()
    if scheme == "single":
        axis = 1 if ModeSelector.parse(single_mode) is ModeA else 0
        return P.sum(axis=axis), D.sum(axis=axis)
    if scheme == "difference":
        return difference_of_table(P)[1], difference_of_table(D)[1]
    if scheme == "parity":
        par, dpar = parity_of_table(P, ModeB), parity_of_table(D, ModeB)
        return np.array([(1 + par) / 2, (1 - par) / 2]), np.array([dpar / 2, -dpar / 2])
    raise ValueError(f"unknown detection scheme {scheme!r}; expected one of {SCHEMES}")


class PhaseProbe:
    """Interferometer with everything before ``PS(phi)`` precomputed.

    Count tables and their exact phi-derivatives come from differentiating
    only the phase shifter (``d/dphi U_PS = i n_a U_PS``) and pushing the
    result through the final beamsplitter and the detectors.
    """

    def __init__(self, state: State, spec: CircuitSpec):
        self.spec = spec
        self.before = state_before_phase(state, spec)
        cols = self.before.sectors if isinstance(self.before, SectorState) else self.before.factors
        self.n_max = self.before.n_max
        self._packed = _core.pack_columns(list(cols))

    def counts(self, phi: float, eta_det: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
        P, D = _core.sector_counts(self._packed, self.n_max, phi)
        if eta_det != 1.0:
            P, D = smear_table(P, eta_det), smear_table(D, eta_det)
        return P, D

    def outcomes(self, phi: float, scheme: str = "joint", eta_det: float = 1.0,
                 single_mode: ModeSelector = ModeB):
        return _scheme_outcomes(*self.counts(phi, eta_det), scheme, single_mode)

    def parity(self, phi: float, eta_det: float = 1.0, mode: ModeSelector = ModeB) -> tuple[float, float]:
        P, D = self.counts(phi, eta_det)
        return parity_of_table(P, mode), parity_of_table(D, mode)

    def fisher(self, phi: float, eta_det: float = 1.0, single_mode: ModeSelector = ModeB,
               schemes=SCHEMES) -> dict[str, float]:
        P, D = self.counts(phi, eta_det)
        return {s: classical_fisher(*_scheme_outcomes(P, D, s, single_mode)).value for s in schemes}


def distribution_derivative(state: State, spec: CircuitSpec, phi: float, scheme: str = "joint",
                            eta_det: float = 1.0, single_mode: ModeSelector = ModeB):
    """``(p, dp/dphi)`` over the outcomes of ``scheme`` at phase ``phi``."""
    return PhaseProbe(state, spec).outcomes(phi, scheme, eta_det, single_mode)


def finite_difference_derivative(state: State, spec: CircuitSpec, phi: float, scheme: str = "joint",
                                 eta_det: float = 1.0, single_mode: ModeSelector = ModeB,
                                 step: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Central difference of the outcome distribution, via full circuit runs."""

    def probs(x):
        P = smear_table(count_table(run_circuit(state, spec.with_phi(x))), eta_det)
        return _scheme_outcomes(P, np.zeros_like(P), scheme, single_mode)[0]

    return (probs(phi + step) - probs(phi - step)) / (2.0 * step)


# quantum Fisher information -------------------------------------------------

def _sector_qfi(n: int, F: np.ndarray) -> float:
    if F.shape[1] == 0:
        return 0.0
    U, s, _ = np.linalg.svd(F, full_matrices=False)
    lam = s ** 2
    keep = lam > EIGEN_FLOOR
    if not np.any(keep):
        return 0.0
    U, lam = U[:, keep], lam[keep]
    NU = photons_in_mode(n, ModeA)[:, None] * U
    G2 = np.abs(U.conj().T @ NU) ** 2
    lsum = lam[:, None] + lam[None, :]
    ldiff = lam[:, None] - lam[None, :]
    pairs = 2.0 * np.sum(ldiff ** 2 / lsum * G2)
    # eigenvectors outside the support contribute 4 lam_i |<e|n_a|i>|^2 each
    outside = np.sum(np.abs(NU) ** 2, axis=0) - G2.sum(axis=0)
    return float(pairs + 4.0 * np.sum(lam * np.clip(outside, 0.0, None)))


def qfi_pure(state: SectorState) -> float:
    """``4 Var(n_a)`` of a pure state (phase generated by ``n_a``)."""
    if not isinstance(state, SectorState):
        raise TypeError("qfi_pure needs a SectorState")
    w = m1 = m2 = 0.0
    for n, v in enumerate(state.sectors):
        p = np.abs(v) ** 2
        k = photons_in_mode(n, ModeA)
        w += p.sum()
        m1 += p @ k
        m2 += p @ (k * k)
    if w == 0.0:
        return 0.0
    return float(4.0 * (m2 - m1 * m1 / w))


def qfi_of_state(state: State) -> float:
    """QFI for phase imprinted by ``exp(i phi n_a)`` on ``state``.

    Pure states use the variance formula over the whole state (inter-sector
    coherences included).  Block-diagonal states are diagonalised sector by
    sector, since ``n_a`` never couples different sectors.
    """
    if isinstance(state, SectorState):
        return qfi_pure(state)
    return float(sum(_sector_qfi(n, f) for n, f in enumerate(state.factors)))


def qfi(state: State, spec: CircuitSpec) -> float:
    """QFI of the state right after ``PS(spec.phi)``."""
    return qfi_of_state(apply_phase_shift(state_before_phase(state, spec), spec.phi, ModeA))


def number_variance(state: State, mode: ModeSelector = ModeA) -> float:
    m1, m2 = mode_number_moments(state, mode)
    return m2 - m1 * m1


def analytic_qfi_reference(input_kind: InputKind | str, mzi_kind: MZIKind | str, nbar: float,
                           chi: float = math.pi / 2) -> float:
    """Closed-form QFI at ``chi = pi/2`` (``nbar`` is ``n`` for number input)."""
    if abs(chi - math.pi / 2) > 1e-12:
        raise UnsupportedChi(f"closed forms exist only for chi = pi/2, got {chi}")
    input_kind = InputKind(input_kind) if not isinstance(input_kind, InputKind) else input_kind
    mzi_kind = MZIKind.parse(mzi_kind)
    x = float(nbar)
    if input_kind is InputKind.NUMBER:
        if mzi_kind is MZIKind.SK:
            return x * x
        n = int(round(x))
        if n != x:
            raise ValueError("number input needs an integer photon number")
        return float(n * n if n % 2 else n)
    table = {
        (MZIKind.SK, InputKind.THERMAL): 2 * x * x + x,
        (MZIKind.SK, InputKind.COHERENT): x * x + 2 * x,
        (MZIKind.CK, InputKind.THERMAL): x * x + x,
        (MZIKind.CK, InputKind.COHERENT): 0.5 * x * x + 2 * x,
    }
    try:
        return table[(mzi_kind, input_kind)]
    except KeyError:
        raise ValueError(f"no closed form for {input_kind.value} input") from None


def cramer_rao_minimum(fisher: float) -> float:
    if not fisher > 0:
        raise ZeroInformation(f"Fisher information {fisher} gives no finite bound")
    return 1.0 / math.sqrt(fisher)


# scans ----------------------------------------------------------------------

def min_phase_error_scan(phis, dphi) -> tuple[float, float]:
    """Grid minimum of a phase-error curve, refined by a parabola through its neighbours."""
    phis = np.asarray(phis, dtype=float)
    dphi = np.asarray(dphi, dtype=float)
    i = int(np.argmin(dphi))
    best, where = float(dphi[i]), float(phis[i])
    if 0 < i < len(phis) - 1 and np.all(np.isfinite(dphi[i - 1: i + 2])):
        x0, x1, x2 = phis[i - 1: i + 2]
        y0, y1, y2 = dphi[i - 1: i + 2]
        denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
        a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
        b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
        if a > 0:
            xv = -b / (2 * a)
            if x0 <= xv <= x2:
                c = y1 - a * x1 * x1 - b * x1
                yv = a * xv * xv + b * xv + c
                if yv <= best:
                    best, where = float(yv), float(xv)
    return best, where


def maximize_over_phase(fn: Callable[[float], float], grid) -> tuple[float, float]:
    """Maximise ``fn`` on ``grid`` and polish the best point with a bounded search."""
    grid = np.asarray(grid, dtype=float)
    vals = np.array([fn(x) for x in grid])
    vals = np.where(np.isfinite(vals), vals, -np.inf)
    i = int(np.argmax(vals))
    best, where = float(vals[i]), float(grid[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda x: -fn(x), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-9 * max(1.0, hi - lo)})
        if res.success and -res.fun > best:
            best, where = float(-res.fun), float(res.x)
    return best, where


@dataclass
class FisherReport:
    """Per-phase classical Fisher information for each scheme plus the QFI."""

    phis: np.ndarray
    F_single: np.ndarray
    F_difference: np.ndarray
    F_joint: np.ndarray
    F_parity: np.ndarray
    F_Q: float
    F_Q_reference: float | None
    metadata: dict = field(default_factory=dict)

    def max_over_phase(self, scheme: str) -> float:
        return float(np.max(getattr(self, f"F_{scheme}")))


def fisher_report(input_spec: InputSpec, spec: CircuitSpec, phis, eta_det: float = 1.0,
                  single_mode: ModeSelector = ModeB, n_max: int | None = None) -> FisherReport:
    state = build_input(input_spec, n_max)
    probe = PhaseProbe(state, spec)
    phis = np.asarray(phis, dtype=float)
    rows = [probe.fisher(phi, eta_det, single_mode) for phi in phis]
    cols = {s: np.array([r[s] for r in rows]) for s in SCHEMES}
    try:
        ref = analytic_qfi_reference(input_spec.kind, spec.kind, input_spec.mean, spec.chi)
    except (UnsupportedChi, ValueError):
        ref = None
    meta = {
        "eta_det": eta_det,
        "eta_loss": spec.eta_loss,
        "kind": spec.kind.value,
        "chi": spec.chi,
        "input": input_spec.label(),
        "n_max": state.n_max,
        "deficit": state.deficit,
        "single_mode": ModeSelector.parse(single_mode).value,
    }
    return FisherReport(phis, cols["single"], cols["difference"], cols["joint"], cols["parity"],
                        qfi(state, spec), ref, meta)
