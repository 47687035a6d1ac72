"""Photon-counting outcomes, detector inefficiency and parity observables."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DoubleSmearError
from .fockspace import (
    ModeA,
    ModeB,
    ModeSelector,
    SectorState,
    State,
    apply_beamsplitter,
    apply_cross_kerr,
    sector_populations,
)
from .interferometer import MZIKind

NEGATIVE_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class JointCountDistribution:
    """``table[m_a, m_b]``: probability of detecting ``m_a`` and ``m_b`` photons.

    ``clamped`` counts entries in ``[-1e-12, 0)`` that were set to zero.
    """

    table: np.ndarray
    smeared: bool = False
    eta_det: float = 1.0
    clamped: int = 0

    def __post_init__(self):
        t = np.array(self.table, dtype=float, copy=True)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValueError("count table must be square")
        if t.size and t.min() < -NEGATIVE_ATOL:
            raise ValueError(f"count table has entry {t.min():.3g} below -{NEGATIVE_ATOL:g}")
        neg = t < 0
        t[neg] = 0.0
        t.setflags(write=False)
        object.__setattr__(self, "table", t)
        object.__setattr__(self, "clamped", int(self.clamped + neg.sum()))

    @property
    def n_max(self) -> int:
        return self.table.shape[0] - 1

    def total(self) -> float:
        return float(self.table.sum())

    def marginal(self, mode: ModeSelector) -> np.ndarray:
        axis = 1 if ModeSelector.parse(mode) is ModeA else 0
        return self.table.sum(axis=axis)


@dataclass(frozen=True)
class DetectorModel:
    """Identical photon-number-resolving detectors of quantum efficiency ``eta_det``."""

    eta_det: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.eta_det <= 1.0:
            raise ValueError(f"eta_det must lie in [0, 1], got {self.eta_det}")


def count_table(state: State) -> np.ndarray:
    """Fock-basis diagonal of a two-mode state as a ``(N+1, N+1)`` array."""
    n_max = state.n_max
    table = np.zeros((n_max + 1, n_max + 1))
    for n in range(n_max + 1):
        k = np.arange(n + 1)
        table[k, n - k] = sector_populations(state, n)
    return table


def joint_count_distribution(state: State) -> JointCountDistribution:
    return JointCountDistribution(count_table(state))


def efficiency_matrix(n_max: int, eta: float) -> np.ndarray:
    """``L[m', m] = Binom(m'; m, eta)``, the detected-count law for ``m`` incident photons."""
    m = np.arange(n_max + 1)
    return stats.binom.pmf(m[:, None], m[None, :], eta)


def smear_table(table: np.ndarray, eta: float) -> np.ndarray:
    """Apply binomial detection loss on both axes; linear, so also valid for derivatives."""
    if eta == 1.0:
        return np.array(table, dtype=float, copy=True)
    L = efficiency_matrix(table.shape[0] - 1, eta)
    return L @ table @ L.T


def apply_detector_efficiency(dist: JointCountDistribution,
                              model: DetectorModel) -> JointCountDistribution:
    if dist.smeared:
        raise DoubleSmearError("distribution already includes detector efficiency")
    return JointCountDistribution(smear_table(dist.table, model.eta_det), smeared=True,
                                  eta_det=model.eta_det, clamped=dist.clamped)


def parity_signs(n_max: int) -> np.ndarray:
    return np.where(np.arange(n_max + 1) % 2 == 0, 1.0, -1.0)


def parity_of_table(table: np.ndarray, mode: ModeSelector = ModeB) -> float:
    """``sum (-1)^m_mode table`` -- works for probabilities and their derivatives."""
    signs = parity_signs(table.shape[0] - 1)
    if ModeSelector.parse(mode) is ModeA:
        return float(signs @ table.sum(axis=1))
    return float(table.sum(axis=0) @ signs)


def parity_expectation(dist: JointCountDistribution, mode: ModeSelector = ModeB) -> float:
    return parity_of_table(dist.table, mode)


def difference_of_table(table: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n_max = table.shape[0] - 1
    d = np.arange(-n_max, n_max + 1)
    # diagonal offset o of table holds m_b - m_a = o
    probs = np.array([np.trace(table, offset=-int(v)) for v in d])
    return d, probs


def intensity_difference_distribution(dist: JointCountDistribution) -> tuple[np.ndarray, np.ndarray]:
    """Distribution of ``d = m_a - m_b``; returns ``(d_values, probabilities)``."""
    return difference_of_table(dist.table)


# closed forms ---------------------------------------------------------------

def number_parity_oracle(n: int, phi, kind: MZIKind | str = MZIKind.SK):
    """Output parity of mode b for ``|n,0>`` at ``chi = pi/2``."""
    kind = MZIKind.parse(kind)
    phi = np.asarray(phi, dtype=float)
    if n == 0:
        return np.ones_like(phi)
    if kind is MZIKind.SK or n % 2 == 1:
        sign = 1.0 if kind is MZIKind.SK else -((-1.0) ** ((n + 1) // 2))
        return sign * np.sin(n * phi)
    return np.sin(phi) ** n


def _series_oracle(log_weights, phi, kind, tol=1e-12):
    # sum_n p_n * Pi_n(phi) until the remaining weight drops below tol
    phi = np.asarray(phi, dtype=float)
    total = np.zeros_like(phi)
    acc = 0.0
    n = 0
    while acc < 1.0 - tol:
        p = math.exp(log_weights(n))
        total = total + p * number_parity_oracle(n, phi, kind)
        acc += p
        n += 1
        if n > 100000:
            raise RuntimeError("parity series did not converge")
    return total


def coherent_parity_oracle(nbar: float, phi, kind: MZIKind | str = MZIKind.SK):
    """Mode-b output parity for ``|alpha,0>`` with ``|alpha|^2 = nbar`` at ``chi = pi/2``.

    Self-Kerr uses the closed form
    ``exp(-nbar) [1 + exp(nbar cos phi) sin(nbar sin phi)]``; cross-Kerr sums
    the number-state results over the Poisson weights.
    """
    kind = MZIKind.parse(kind)
    phi = np.asarray(phi, dtype=float)
    if kind is MZIKind.SK:
        return np.exp(-nbar) + np.exp(nbar * (np.cos(phi) - 1.0)) * np.sin(nbar * np.sin(phi))
    if nbar == 0:
        return np.ones_like(phi)
    return _series_oracle(lambda n: -nbar + n * math.log(nbar) - math.lgamma(n + 1), phi, kind)


def thermal_parity_oracle(nbar: float, phi, kind: MZIKind | str = MZIKind.SK):
    """Mode-b output parity for thermal input at ``chi = pi/2``.

    Self-Kerr: ``1/(1+nbar) + sum_n p_n sin(n phi)`` summed as a geometric
    series.  Cross-Kerr: direct series over the thermal weights.
    """
    kind = MZIKind.parse(kind)
    phi = np.asarray(phi, dtype=float)
    p0 = 1.0 / (1.0 + nbar)
    if kind is MZIKind.SK:
        q = nbar / (1.0 + nbar)
        return p0 + np.imag(p0 / (1.0 - q * np.exp(1j * phi)))
    if nbar == 0:
        return np.ones_like(phi)
    lq = math.log(nbar / (1.0 + nbar))
    return _series_oracle(lambda n: n * lq - math.log1p(nbar), phi, kind)


# parity filter --------------------------------------------------------------

def marginal_number_distribution(state: State, mode: ModeSelector = ModeB) -> np.ndarray:
    """Photon-number distribution of one mode."""
    return JointCountDistribution(count_table(state)).marginal(mode)


def parity_filter(populations, chi: float = math.pi) -> tuple[float, float]:
    """Route a single-mode state through the cross-Kerr parity device.

    ``populations[n]`` is the probability of ``n`` photons in the measured
    mode (pass ``abs(amplitudes)**2`` for a pure state; the device conserves
    photon number, so only the diagonal matters).  The mode enters port 1 of
    ``U_BS exp(i chi n_1 n_2) U_BS`` with vacuum in port 2.

    Returns ``(p_D1, p_D2)``: ``p_D2`` is the probability that detector 2
    registers photons, ``p_D1 = 1 - p_D2`` (vacuum counts towards D1, the
    even-parity port).
    """
    pops = np.asarray(populations, dtype=float)
    p_d2 = 0.0
    for n, p in enumerate(pops):
        if p == 0.0:
            continue
        state = SectorState.basis(n, 0)
        state = apply_beamsplitter(apply_cross_kerr(apply_beamsplitter(state), chi))
        out = sector_populations(state, n)
        # index k = photons at D1; D2 holds n - k
        p_d2 += p * float(out[: n].sum()) if n > 0 else 0.0
    total = float(pops.sum())
    return total - p_d2, p_d2
