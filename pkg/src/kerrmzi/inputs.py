"""Input states with mode b in vacuum: |n,0>, |alpha,0>, thermal and diagonal mixtures."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .errors import TruncationError
from .fockspace import SectorDensity, SectorState

DEFAULT_TAIL_TOLERANCE = 1e-10


class InputKind(enum.Enum):
    NUMBER = "number"
    COHERENT = "coherent"
    THERMAL = "thermal"
    MIXTURE = "mixture"


@dataclass(frozen=True)
class InputSpec:
    """Photon-number statistics of the populated input mode a.

    Use the ``number``/``coherent``/``thermal``/``mixture`` constructors.
    Coherent amplitudes are taken real and positive, ``alpha = sqrt(nbar)``.
    """

    kind: InputKind
    n: int | None = None
    nbar: float | None = None
    weights: tuple[float, ...] = field(default=())
    tail_tolerance: float = DEFAULT_TAIL_TOLERANCE

    def __post_init__(self):
        if not 0.0 < self.tail_tolerance < 1.0:
            raise ValueError("tail_tolerance must lie in (0, 1)")
        if self.kind is InputKind.NUMBER:
            if self.n is None or int(self.n) != self.n or self.n < 0:
                raise ValueError("number input needs a non-negative integer n")
        elif self.kind in (InputKind.COHERENT, InputKind.THERMAL):
            if self.nbar is None or not math.isfinite(self.nbar) or self.nbar < 0:
                raise ValueError("nbar must be finite and non-negative")
        else:
            w = np.asarray(self.weights, dtype=float)
            if w.size == 0 or np.any(w < 0):
                raise ValueError("mixture weights must be non-negative and non-empty")
            if abs(w.sum() - 1.0) > 1e-12:
                raise ValueError(f"mixture weights sum to {w.sum():.15g}, expected 1")

    @classmethod
    def number(cls, n: int, tail_tolerance: float = DEFAULT_TAIL_TOLERANCE) -> "InputSpec":
        return cls(InputKind.NUMBER, n=int(n), tail_tolerance=tail_tolerance)

    @classmethod
    def coherent(cls, nbar: float, tail_tolerance: float = DEFAULT_TAIL_TOLERANCE) -> "InputSpec":
        return cls(InputKind.COHERENT, nbar=float(nbar), tail_tolerance=tail_tolerance)

    @classmethod
    def thermal(cls, nbar: float, tail_tolerance: float = DEFAULT_TAIL_TOLERANCE) -> "InputSpec":
        return cls(InputKind.THERMAL, nbar=float(nbar), tail_tolerance=tail_tolerance)

    @classmethod
    def mixture(cls, weights, tail_tolerance: float = DEFAULT_TAIL_TOLERANCE) -> "InputSpec":
        return cls(InputKind.MIXTURE, weights=tuple(float(w) for w in weights),
                   tail_tolerance=tail_tolerance)

    @property
    def mean(self) -> float:
        if self.kind is InputKind.NUMBER:
            return float(self.n)
        if self.kind is InputKind.MIXTURE:
            return float(np.arange(len(self.weights)) @ np.asarray(self.weights))
        return float(self.nbar)

    @property
    def is_pure(self) -> bool:
        return self.kind in (InputKind.NUMBER, InputKind.COHERENT)

    def label(self) -> str:
        if self.kind is InputKind.NUMBER:
            return f"number:{self.n}"
        if self.kind is InputKind.MIXTURE:
            return "mixture"
        return f"{self.kind.value}:{self.nbar:g}"

    def photon_number_weights(self, n_max: int) -> np.ndarray:
        """``p_n`` for ``n = 0..n_max`` (not renormalised)."""
        n = np.arange(n_max + 1, dtype=float)
        if self.kind is InputKind.NUMBER:
            return (n == self.n).astype(float)
        if self.kind is InputKind.MIXTURE:
            w = np.zeros(n_max + 1)
            src = np.asarray(self.weights[: n_max + 1])
            w[: src.size] = src
            return w
        nbar = self.nbar
        if nbar == 0.0:
            return (n == 0).astype(float)
        if self.kind is InputKind.THERMAL:
            return np.exp(n * np.log(nbar / (1.0 + nbar)) - np.log1p(nbar))
        return np.exp(-nbar + n * np.log(nbar) - gammaln(n + 1.0))

    def tail_mass(self, n_max: int) -> float:
        """Probability of more than ``n_max`` photons."""
        if self.kind is InputKind.NUMBER:
            return 0.0 if self.n <= n_max else 1.0
        if self.kind is InputKind.MIXTURE:
            return float(np.sum(self.weights[n_max + 1:]))
        if self.nbar == 0.0:
            return 0.0
        if self.kind is InputKind.THERMAL:
            return float(np.exp((n_max + 1) * np.log(self.nbar / (1.0 + self.nbar))))
        return float(stats.poisson.sf(n_max, self.nbar))


def required_cutoff(spec: InputSpec, tail_tolerance: float | None = None) -> int:
    """Smallest ``N`` with ``P(n > N) < tail_tolerance``."""
    tol = spec.tail_tolerance if tail_tolerance is None else tail_tolerance
    if not 0.0 < tol < 1.0:
        raise ValueError("tail_tolerance must lie in (0, 1)")
    if spec.kind is InputKind.NUMBER:
        return int(spec.n)
    if spec.kind is InputKind.MIXTURE:
        w = np.asarray(spec.weights)
        tails = np.concatenate([np.cumsum(w[::-1])[::-1][1:], [0.0]])
        return int(np.argmax(tails < tol))
    if spec.nbar == 0.0:
        return 0
    if spec.kind is InputKind.THERMAL:
        q = spec.nbar / (1.0 + spec.nbar)
        guess = max(int(math.ceil(math.log(tol) / math.log(q))) - 3, 0)
    else:
        guess = int(spec.nbar)
    n_max = guess
    while spec.tail_mass(n_max) >= tol:
        n_max += 1
    while n_max > 0 and spec.tail_mass(n_max - 1) < tol:
        n_max -= 1
    return n_max


def build_input(spec: InputSpec, n_max: int | None = None) -> SectorState | SectorDensity:
    """Input state with every photon in mode a (basis index ``k = n``).

    Number and coherent inputs give a :class:`SectorState`; thermal and
    mixture inputs give a :class:`SectorDensity`.
    """
    if n_max is None:
        n_max = required_cutoff(spec)
    n_max = int(n_max)
    tail = spec.tail_mass(n_max)
    if tail >= spec.tail_tolerance:
        raise TruncationError(
            f"n_max={n_max} leaves tail mass {tail:.3g} >= tail_tolerance {spec.tail_tolerance:g} "
            f"for {spec.label()}")
    p = spec.photon_number_weights(n_max)
    if spec.is_pure:
        secs = []
        for n in range(n_max + 1):
            v = np.zeros(n + 1, dtype=complex)
            v[n] = np.sqrt(p[n])
            secs.append(v)
        return SectorState(tuple(secs), deficit=tail)
    facs = []
    for n in range(n_max + 1):
        f = np.zeros((n + 1, 1 if p[n] > 0 else 0), dtype=complex)
        if p[n] > 0:
            f[n, 0] = np.sqrt(p[n])
        facs.append(f)
    return SectorDensity(tuple(facs), deficit=tail)
