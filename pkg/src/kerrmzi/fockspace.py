"""Two-mode Fock algebra in the total-photon-number (sector) basis.

Sector ``n`` spans the states ``|k, n-k>`` with ``k = 0..n`` photons in mode a
and the rest in mode b.  The beamsplitter, the phase shifters and both Kerr
elements conserve ``n``, so a state is stored sector by sector rather than as
a flat ``(N+1)**2`` array:

* :class:`SectorState` holds one amplitude vector per sector.  It is a single
  pure state, so coherences *between* sectors are kept implicitly.
* :class:`SectorDensity` holds a factor ``F_n`` per sector with
  ``block_n = F_n F_n^dagger``.  Coherences between sectors are not
  represented (block-diagonal density operator).
"""

from __future__ import annotations

import enum
import functools
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import NegativeEigenvalueError

HERMITIAN_ATOL = 1e-12
PSD_ATOL = 1e-10
# user-supplied blocks further than this from Hermitian are rejected, not repaired
_HERMITIAN_REJECT = 1e-8


class ModeSelector(enum.Enum):
    A = "a"
    B = "b"

    @classmethod
    def parse(cls, value: "ModeSelector | str") -> "ModeSelector":
        if isinstance(value, cls):
            return value
        return cls(str(value).strip().lower())


ModeA = ModeSelector.A
ModeB = ModeSelector.B


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


def photons_in_mode(n: int, mode: ModeSelector = ModeA) -> np.ndarray:
    """Photon count of ``mode`` for each basis index ``k`` of sector ``n``."""
    k = np.arange(n + 1, dtype=float)
    return k if ModeSelector.parse(mode) is ModeA else n - k


@dataclass(frozen=True, eq=False)
class SectorState:
    """Pure two-mode state, one amplitude vector per total photon number.

    ``sectors[n][k]`` is the amplitude of ``|k, n-k>``.  ``deficit`` is the
    probability mass lost to truncation of the input; the state is never
    renormalised to hide it.
    """

    sectors: tuple[np.ndarray, ...]
    deficit: float = 0.0

    def __post_init__(self):
        secs = []
        for n, vec in enumerate(self.sectors):
            vec = np.asarray(vec).reshape(-1)
            if vec.shape[0] != n + 1:
                raise ValueError(f"sector {n} must have length {n + 1}, got {vec.shape[0]}")
            secs.append(_readonly(vec))
        if not secs:
            raise ValueError("a state needs at least the vacuum sector")
        object.__setattr__(self, "sectors", tuple(secs))
        object.__setattr__(self, "deficit", float(self.deficit))

    @classmethod
    def from_mapping(cls, amplitudes: Mapping[int, Sequence[complex]], n_max: int | None = None,
                     deficit: float = 0.0) -> "SectorState":
        top = max(amplitudes) if n_max is None else n_max
        secs = [np.zeros(n + 1, dtype=complex) for n in range(top + 1)]
        for n, vec in amplitudes.items():
            secs[n] = np.asarray(vec, dtype=complex)
        return cls(tuple(secs), deficit)

    @classmethod
    def basis(cls, n_a: int, n_b: int, n_max: int | None = None) -> "SectorState":
        n = n_a + n_b
        vec = np.zeros(n + 1, dtype=complex)
        vec[n_a] = 1.0
        return cls.from_mapping({n: vec}, n_max=n if n_max is None else n_max)

    @property
    def n_max(self) -> int:
        return len(self.sectors) - 1

    def sector_weights(self) -> np.ndarray:
        return np.array([np.vdot(v, v).real for v in self.sectors])

    def norm(self) -> float:
        return float(self.sector_weights().sum())

    def to_density(self) -> "SectorDensity":
        """Block-diagonal part of ``|psi><psi|`` (drops inter-sector coherence)."""
        return SectorDensity(tuple(v[:, None] for v in self.sectors), self.deficit)


@dataclass(frozen=True, eq=False)
class SectorDensity:
    """Block-diagonal two-mode density operator in factored form.

    ``factors[n]`` has shape ``(n+1, r_n)`` and the sector block is
    ``F F^dagger``, which keeps every block Hermitian and positive
    semidefinite by construction.
    """

    factors: tuple[np.ndarray, ...]
    deficit: float = 0.0

    def __post_init__(self):
        facs = []
        for n, f in enumerate(self.factors):
            f = np.asarray(f)
            if f.ndim == 1:
                f = f[:, None]
            if f.ndim != 2 or f.shape[0] != n + 1:
                raise ValueError(f"factor of sector {n} must have {n + 1} rows, got shape {f.shape}")
            facs.append(_readonly(f))
        if not facs:
            raise ValueError("a state needs at least the vacuum sector")
        object.__setattr__(self, "factors", tuple(facs))
        object.__setattr__(self, "deficit", float(self.deficit))

    @classmethod
    def from_blocks(cls, blocks: Sequence[np.ndarray] | Mapping[int, np.ndarray],
                    deficit: float = 0.0) -> "SectorDensity":
        """Factor explicit Hermitian blocks.

        Blocks are symmetrised as ``(B + B^dagger)/2``.  Eigenvalues below
        ``-PSD_ATOL`` raise :class:`NegativeEigenvalueError`; the remaining
        non-positive ones are treated as exact zeros.
        """
        if isinstance(blocks, Mapping):
            top = max(blocks)
            blocks = [blocks.get(n, np.zeros((n + 1, n + 1))) for n in range(top + 1)]
        return cls(tuple(factor_block(b, sector=n) for n, b in enumerate(blocks)), deficit)

    @property
    def n_max(self) -> int:
        return len(self.factors) - 1

    def block(self, n: int) -> np.ndarray:
        f = self.factors[n]
        return f @ f.conj().T

    @property
    def blocks(self) -> tuple[np.ndarray, ...]:
        return tuple(self.block(n) for n in range(self.n_max + 1))

    def sector_weights(self) -> np.ndarray:
        return np.array([np.sum(np.abs(f) ** 2) for f in self.factors])

    def trace(self) -> float:
        return float(self.sector_weights().sum())

    def purity(self) -> float:
        return float(sum(np.sum(np.abs(f.conj().T @ f) ** 2) for f in self.factors))

    def compressed(self) -> "SectorDensity":
        """Re-factor sectors whose factor has more columns than rows."""
        facs = []
        for n, f in enumerate(self.factors):
            facs.append(factor_block(f @ f.conj().T, sector=n) if f.shape[1] > n + 1 else f)
        return SectorDensity(tuple(facs), self.deficit)


State = Union[SectorState, SectorDensity]


def factor_block(block: np.ndarray, sector: int | None = None) -> np.ndarray:
    block = np.asarray(block, dtype=complex)
    asym = np.max(np.abs(block - block.conj().T)) if block.size else 0.0
    if asym > _HERMITIAN_REJECT:
        raise ValueError(f"block of sector {sector} is not Hermitian (deviation {asym:.3g})")
    herm = 0.5 * (block + block.conj().T)
    w, v = np.linalg.eigh(herm)
    if w.size and w.min() < -PSD_ATOL:
        raise NegativeEigenvalueError(
            f"sector {sector} has eigenvalue {w.min():.3g} below -{PSD_ATOL:g}")
    keep = w > 0
    return v[:, keep] * np.sqrt(w[keep])


def map_sectors(state: State, fn: Callable[[int, np.ndarray], np.ndarray]) -> State:
    """Apply ``fn(n, x)`` to every sector vector (pure) or factor (mixed)."""
    if isinstance(state, SectorState):
        return SectorState(tuple(fn(n, v) for n, v in enumerate(state.sectors)), state.deficit)
    return SectorDensity(tuple(fn(n, f) for n, f in enumerate(state.factors)), state.deficit)


def _scale_rows(d: np.ndarray, x: np.ndarray) -> np.ndarray:
    return d * x if x.ndim == 1 else d[:, None] * x


def apply_diagonal_phase(state: State, phase: Callable[[int], np.ndarray]) -> State:
    """Multiply amplitude ``(n, k)`` by ``exp(1j * phase(n)[k])``."""
    return map_sectors(state, lambda n, x: _scale_rows(np.exp(1j * phase(n)), x))


@functools.lru_cache(maxsize=1024)
def beamsplitter_sector_matrix(n: int) -> np.ndarray:
    """50:50 beamsplitter ``exp(i pi/4 (a^dag b + a b^dag))`` restricted to sector ``n``.

    Built from the eigendecomposition of the tridiagonal generator.  The
    returned array is cached and read-only.
    """
    n = int(n)
    if n < 0:
        raise ValueError("sector index must be non-negative")
    if n == 0:
        return _readonly(np.ones((1, 1)))
    k = np.arange(n, dtype=float)
    off = np.sqrt((k + 1.0) * (n - k))
    w, v = eigh_tridiagonal(np.zeros(n + 1), off)
    return _readonly((v * np.exp(0.25j * np.pi * w)) @ v.T)


def apply_beamsplitter(state: State) -> State:
    return map_sectors(state, lambda n, x: beamsplitter_sector_matrix(n) @ x)


def apply_phase_shift(state: State, phi: float, mode: ModeSelector = ModeA) -> State:
    """``exp(i phi n_mode)``; amplitude ``(n, k)`` picks up ``exp(i k phi)`` for mode a."""
    mode = ModeSelector.parse(mode)
    return apply_diagonal_phase(state, lambda n: phi * photons_in_mode(n, mode))


def apply_self_kerr(state: State, chi: float, mode: ModeSelector = ModeA) -> State:
    """``exp(i chi a^dag2 a^2)``: phase ``chi k (k-1)`` for ``k`` photons in the mode."""
    mode = ModeSelector.parse(mode)

    def phase(n):
        m = photons_in_mode(n, mode)
        return chi * m * (m - 1.0)

    return apply_diagonal_phase(state, phase)


def apply_cross_kerr(state: State, chi: float) -> State:
    """``exp(i chi n_a n_b)``: phase ``chi k (n-k)``."""

    def phase(n):
        k = np.arange(n + 1, dtype=float)
        return chi * k * (n - k)

    return apply_diagonal_phase(state, phase)


def sector_populations(state: State, n: int) -> np.ndarray:
    """Diagonal of sector ``n`` (probabilities of ``|k, n-k>``)."""
    if isinstance(state, SectorState):
        return np.abs(state.sectors[n]) ** 2
    return np.sum(np.abs(state.factors[n]) ** 2, axis=1)


def mode_number_moments(state: State, mode: ModeSelector = ModeA) -> tuple[float, float]:
    """Return ``(<n>, <n^2>)`` for the photon number of ``mode``."""
    mode = ModeSelector.parse(mode)
    first = second = 0.0
    for n in range(state.n_max + 1):
        p = sector_populations(state, n)
        m = photons_in_mode(n, mode)
        first += float(p @ m)
        second += float(p @ (m * m))
    return first, second
