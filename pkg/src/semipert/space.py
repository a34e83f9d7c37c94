"""Finite weighted measure spaces, weighted L_p norms and dual pairings.

Every object in the package lives over a :class:`MeasureSpace`: finitely many
atoms, each carrying a strictly positive mass.  Vectors over such a space are
wrapped in :class:`LpElement`, which records the Lebesgue exponent the vector
is meant to be measured in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidExponentError, ValidationError

INF = math.inf

_MIN_WEIGHT = 1e-300


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def check_exponent(p: float) -> float:
    p = float(p)
    if math.isnan(p) or p < 1:
        raise InvalidExponentError(f"exponent must lie in [1, inf], got {p!r}")
    return p


def parse_exponent(raw) -> float:
    """Read an exponent from a number or the strings ``"inf"`` / ``"infinity"``."""
    if isinstance(raw, str):
        if raw.strip().lower() in {"inf", "infinity", "∞"}:
            return INF
        raw = float(raw)
    return check_exponent(raw)


def format_exponent(p: float):
    return "inf" if p == INF else p


@dataclass(frozen=True, eq=False)
class MeasureSpace:
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ValidationError("weights must be a non-empty 1-d array")
        if not np.all(np.isfinite(w)) or np.any(w < _MIN_WEIGHT):
            raise ValidationError(
                f"weights must be finite and at least {_MIN_WEIGHT:g}, got {w.tolist()}"
            )
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def uniform(cls, n: int) -> "MeasureSpace":
        return cls(np.ones(n))

    @property
    def n(self) -> int:
        return int(self.weights.size)

    def same_as(self, other: "MeasureSpace") -> bool:
        return self is other or (
            self.n == other.n and np.array_equal(self.weights, other.weights)
        )

    def require_same(self, other: "MeasureSpace") -> None:
        if not self.same_as(other):
            raise DimensionError(
                f"measure spaces differ (n={self.n} vs n={other.n} or unequal weights)"
            )

    def element(self, values, p: float = 2.0, nonneg: bool = False) -> "LpElement":
        return LpElement(values, p, self, nonneg)

    def basis(self, i: int, p: float = 2.0) -> "LpElement":
        e = np.zeros(self.n)
        e[i] = 1.0
        return LpElement(e, p, self, nonneg=True)

    def ones(self, p: float = 2.0) -> "LpElement":
        return LpElement(np.ones(self.n), p, self, nonneg=True)

    def __repr__(self) -> str:
        return f"MeasureSpace(n={self.n}, weights={self.weights.tolist()})"


@dataclass(frozen=True, eq=False)
class LpElement:
    """A real vector over ``space`` regarded as an element of L_p(m).

    ``nonneg`` marks elements of the positive cone; it is validated, not
    inferred.
    """

    values: np.ndarray
    exponent: float
    space: MeasureSpace
    nonneg: bool = False

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size != self.space.n:
            raise DimensionError(
                f"element has shape {v.shape}, space has {self.space.n} atoms"
            )
        if not np.all(np.isfinite(v)):
            raise ValidationError("element values must be finite")
        if self.nonneg and np.any(v < 0):
            raise ValidationError("element flagged nonnegative has a negative entry")
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "exponent", check_exponent(self.exponent))

    @property
    def n(self) -> int:
        return self.space.n

    def with_values(self, values, nonneg: bool = False) -> "LpElement":
        return LpElement(values, self.exponent, self.space, nonneg)

    def norm(self, p: float | None = None) -> float:
        return lp_norm(self, self.exponent if p is None else p)

    def __repr__(self) -> str:
        return (
            f"LpElement({self.values.tolist()}, p={format_exponent(self.exponent)}, "
            f"n={self.n}, nonneg={self.nonneg})"
        )


def as_values(x, n: int | None = None) -> np.ndarray:
    if isinstance(x, LpElement):
        return x.values
    arr = np.asarray(x, dtype=float)
    if n is not None and arr.shape != (n,):
        raise DimensionError(f"expected a vector of length {n}, got shape {arr.shape}")
    return arr


def dual_pairing(f: LpElement, g: LpElement) -> float:
    """Return the weighted pairing ``sum_i f_i g_i m_i``."""
    f.space.require_same(g.space)
    return float(np.dot(f.values * g.values, f.space.weights))


def pairing_values(f: np.ndarray, g: np.ndarray, weights: np.ndarray) -> float:
    return float(np.dot(f * g, weights))


def lp_norm(u: LpElement, p: float) -> float:
    p = check_exponent(p)
    return _lp_norm(u.values, u.space.weights, p)


def _lp_norm(values: np.ndarray, weights: np.ndarray, p: float) -> float:
    a = np.abs(values)
    if p == INF:
        return float(a.max())
    if p == 1:
        return float(np.dot(a, weights))
    scale = a.max()
    if scale == 0:
        return 0.0
    # rescale to keep a**p away from overflow/underflow
    return float(scale * np.dot((a / scale) ** p, weights) ** (1.0 / p))


def dual_exponent(p: float) -> float:
    """Conjugate exponent ``p/(p-1)``, with 1 and infinity swapped exactly."""
    p = check_exponent(p)
    if p == 1:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1.0)
