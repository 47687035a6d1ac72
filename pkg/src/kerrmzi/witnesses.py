"""Moment-based entanglement witnesses and zero-delay second-order coherence."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedG2
from .fockspace import ModeA, ModeSelector, SectorState, State, photons_in_mode, sector_populations

G2_MEAN_FLOOR = 1e-12


@dataclass(frozen=True)
class MomentSet:
    a: complex
    b: complex
    n_a: float
    n_b: float
    adag_b: complex
    ab: complex
    na_nb: float
    adag2_a2: float
    bdag2_b2: float

    @property
    def adag_bdag(self) -> complex:
        return complex(np.conj(self.ab))


def _hop_amplitude(n: int) -> np.ndarray:
    # <k+1, n-k-1| a^dag b |k, n-k>
    k = np.arange(n, dtype=float)
    return np.sqrt((k + 1.0) * (n - k))


def compute_moments(state: State) -> MomentSet:
    """Ladder-operator moments of a sector-resolved state.

    ``<a>``, ``<b>`` and ``<ab>`` change the total photon number, so they are
    zero for a :class:`~kerrmzi.fockspace.SectorDensity` and are summed over
    adjacent sectors for a pure :class:`~kerrmzi.fockspace.SectorState`.
    """
    n_a = n_b = na_nb = a2 = b2 = 0.0
    adag_b = 0j
    for n in range(state.n_max + 1):
        p = sector_populations(state, n)
        ka = photons_in_mode(n, ModeA)
        kb = n - ka
        n_a += p @ ka
        n_b += p @ kb
        na_nb += p @ (ka * kb)
        a2 += p @ (ka * (ka - 1.0))
        b2 += p @ (kb * (kb - 1.0))
        if n == 0:
            continue
        # tr(rho a^dag b) = sum_k rho[k, k+1] * hop_k
        if isinstance(state, SectorState):
            v = state.sectors[n]
            adag_b += np.sum(v[:-1] * np.conj(v[1:]) * _hop_amplitude(n))
        else:
            f = state.factors[n]
            adag_b += np.sum(np.sum(f[:-1] * np.conj(f[1:]), axis=1) * _hop_amplitude(n))

    a = b = ab = 0j
    if isinstance(state, SectorState):
        secs = state.sectors
        for n in range(1, len(secs)):
            k = np.arange(n + 1, dtype=float)
            lower = secs[n - 1]
            # a|k,n-k> = sqrt(k)|k-1,n-k>,  b|k,n-k> = sqrt(n-k)|k,n-k-1>
            a += np.sum(np.conj(lower) * np.sqrt(k[1:]) * secs[n][1:])
            b += np.sum(np.conj(lower) * np.sqrt(n - k[:-1]) * secs[n][:-1])
            if n >= 2:
                ab += np.sum(np.conj(secs[n - 2]) * np.sqrt(k[1:-1] * (n - k[1:-1])) * secs[n][1:-1])
    return MomentSet(complex(a), complex(b), float(n_a), float(n_b), complex(adag_b), complex(ab),
                     float(na_nb), float(a2), float(b2))


def hillery_zubairy(m: MomentSet) -> float:
    """``<n_a n_b> - |<a^dag b>|^2``; negative values certify entanglement."""
    return float(m.na_nb - abs(m.adag_b) ** 2)


def shchukin_vogel(m: MomentSet) -> float:
    """Determinant of the partially transposed 3x3 moment matrix of (1, a, b^dag).

    Negative values certify entanglement. The first row carries ``<a>`` so
    that product coherent states give exactly zero.
    """
    mat = np.array([
        [1.0, m.a, np.conj(m.b)],
        [np.conj(m.a), m.n_a, m.adag_bdag],
        [m.b, m.ab, m.n_b],
    ], dtype=complex)
    return float(np.linalg.det(mat).real)


def g2_zero(state: State, mode: ModeSelector = ModeA) -> float:
    """``<a^dag2 a^2> / <a^dag a>^2`` of the chosen mode."""
    m = compute_moments(state)
    if ModeSelector.parse(mode) is ModeA:
        mean, pair = m.n_a, m.adag2_a2
    else:
        mean, pair = m.n_b, m.bdag2_b2
    if mean <= G2_MEAN_FLOOR:
        raise UndefinedG2(f"mean photon number {mean:.3g} of mode {ModeSelector.parse(mode).value} is zero")
    return float(pair / mean ** 2)
