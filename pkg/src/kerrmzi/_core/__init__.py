"""Hot kernels with a compiled backend and a numpy fallback.

The compiled extension is used when importable.  ``set_backend("python")``
forces the fallback (benchmarks and equivalence tests use this).
"""

from __future__ import annotations

import functools

import numpy as np

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _fallback}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled

_impl = _compiled if _compiled is not None else _fallback


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def backend() -> str:
    return "cython" if _impl is _compiled and _compiled is not None else "python"


def set_backend(name: str) -> None:
    global _impl
    try:
        _impl = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {available_backends()}") from None


def kraus_branches(F: np.ndarray, coeff: np.ndarray, on_mode_a: bool) -> np.ndarray:
    """Apply every pure-loss Kraus operator to the factor ``F`` of sector ``n``.

    ``coeff[m, j]`` is the amplitude for losing ``j`` of ``m`` photons in the
    lossy mode.  Returns ``out`` with ``out[j, :n+1-j]`` the factor landing in
    sector ``n - j``.
    """
    F = np.ascontiguousarray(F, dtype=np.complex128)
    coeff = np.ascontiguousarray(coeff, dtype=np.float64)
    return _impl.kraus_branches(F, coeff, bool(on_mode_a))


@functools.lru_cache(maxsize=4)
def packed_beamsplitters(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    from ..fockspace import beamsplitter_sector_matrix

    offsets = np.zeros(n_max + 2, dtype=np.int64)
    offsets[1:] = np.cumsum([(n + 1) ** 2 for n in range(n_max + 1)])
    flat = np.empty(offsets[-1], dtype=np.complex128)
    for n in range(n_max + 1):
        flat[offsets[n]: offsets[n + 1]] = beamsplitter_sector_matrix(n).ravel()
    flat.setflags(write=False)
    return flat, offsets


def pack_columns(columns: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flatten per-sector factors (sector order) into ``(amp, col_sector, col_offset)``."""
    sectors, offsets, chunks = [], [], []
    pos = 0
    for n, f in enumerate(columns):
        f = f[:, None] if f.ndim == 1 else f
        for c in range(f.shape[1]):
            sectors.append(n)
            offsets.append(pos)
            pos += n + 1
        if f.shape[1]:
            chunks.append(np.ascontiguousarray(f.T).ravel())
    amp = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.complex128)
    return (amp.astype(np.complex128), np.asarray(sectors, dtype=np.int64),
            np.asarray(offsets, dtype=np.int64))


def sector_counts(packed: tuple[np.ndarray, np.ndarray, np.ndarray], n_max: int,
                  phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Joint count table and its phi-derivative after ``PS(phi)`` then the final beamsplitter.

    Returns ``(P, D)`` with ``P[m_a, m_b]`` the ideal-detector probability.
    """
    amp, col_sector, col_offset = packed
    bs_flat, bs_offset = packed_beamsplitters(n_max)
    return _impl.sector_counts(amp, col_sector, col_offset, bs_flat, bs_offset, float(phi), int(n_max))
