"""Generators of matrix semigroups and the operations built on them.

Convention: a :class:`Generator` ``G`` generates ``T(t) = exp(tG)``.  Forms
produce ``G = -A`` where ``A`` is the operator associated with the form.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DimensionError,
    EulerStepError,
    InvalidTimeError,
    ResolventSetError,
    UnsupportedError,
    ValidationError,
)
from .space import INF, LpElement, MeasureSpace, check_exponent

# relative pivot size below which a factorization counts as singular
_SINGULAR_RTOL = 1e-14


@dataclass(frozen=True, eq=False)
class Generator:
    matrix: np.ndarray
    space: MeasureSpace

    def __post_init__(self):
        a = np.array(self.matrix, dtype=float)
        n = self.space.n
        if a.shape != (n, n):
            raise DimensionError(f"generator has shape {a.shape}, space has {n} atoms")
        if not np.all(np.isfinite(a)):
            raise ValidationError("generator entries must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    @property
    def n(self) -> int:
        return self.space.n

    def __sub__(self, other: "Generator") -> np.ndarray:
        self.space.require_same(other.space)
        return self.matrix - other.matrix

    def __repr__(self) -> str:
        return f"Generator(n={self.n}, matrix={self.matrix.tolist()})"


@dataclass(frozen=True)
class PositivityReport:
    is_metzler: bool
    violating_entry: tuple[int, int, float] | None = None

    def to_dict(self) -> dict:
        v = self.violating_entry
        return {
            "is_metzler": self.is_metzler,
            "violating_entry": None if v is None else [v[0], v[1], v[2]],
        }


def _require_element(G: Generator, u: LpElement) -> None:
    G.space.require_same(u.space)


def _check_time(t: float) -> float:
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise InvalidTimeError(f"time must be finite and >= 0, got {t!r}")
    return t


def semigroup_matrix(G: Generator, t: float) -> np.ndarray:
    """Dense ``exp(tG)`` by scaling and squaring with a Pade approximant."""
    t = _check_time(t)
    if t == 0:
        return np.eye(G.n)
    return scipy.linalg.expm(t * G.matrix)


def semigroup_apply(G: Generator, t: float, u: LpElement) -> LpElement:
    _require_element(G, u)
    t = _check_time(t)
    if t == 0:
        return u.with_values(u.values.copy(), nonneg=u.nonneg)
    return u.with_values(semigroup_matrix(G, t) @ u.values)


class ShiftedFactor:
    """LU factorization of ``alpha*I - beta*G`` reused across repeated solves."""

    def __init__(self, G: Generator, alpha: float, beta: float = 1.0):
        self.n = G.n
        a = alpha * np.eye(G.n) - beta * G.matrix
        # singularity is detected below from the pivots, so scipy's warning is noise
        with np.errstate(all="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
        d = np.abs(np.diag(lu))
        scale = max(np.abs(a).max(), 1.0)
        self.singular = not np.all(np.isfinite(lu)) or d.min() <= _SINGULAR_RTOL * scale
        self._lu = (lu, piv)

    def solve(self, b: np.ndarray, trans: int = 0) -> np.ndarray:
        return scipy.linalg.lu_solve(self._lu, b, trans=trans, check_finite=False)

    def power(self, b: np.ndarray, k: int, trans: int = 0) -> np.ndarray:
        x = np.array(b, dtype=float)
        for _ in range(k):
            x = self.solve(x, trans)
        return x

    def powers(self, b: np.ndarray, k: int, trans: int = 0) -> list[np.ndarray]:
        """``[b, R b, R^2 b, ..., R^k b]`` with ``R`` the inverse of the factored matrix."""
        out = [np.array(b, dtype=float)]
        for _ in range(k):
            out.append(self.solve(out[-1], trans))
        return out


def resolvent_factor(G: Generator, lam: float) -> ShiftedFactor:
    fac = ShiftedFactor(G, float(lam))
    if fac.singular:
        raise ResolventSetError(f"lambda={lam!r} is not in the resolvent set", lam=lam)
    return fac


def resolvent_apply(G: Generator, lam: float, u: LpElement, power: int = 1) -> LpElement:
    """Return ``(lam - G)^{-power} u`` via repeated solves on one LU factorization."""
    _require_element(G, u)
    if int(power) != power or power < 1:
        raise ValidationError(f"power must be a positive integer, got {power!r}")
    fac = resolvent_factor(G, lam)
    return u.with_values(fac.power(u.values, int(power)))


def euler_factor(G: Generator, t: float, n: int) -> ShiftedFactor:
    fac = ShiftedFactor(G, 1.0, t / n)
    if fac.singular:
        raise EulerStepError(f"I - tG/n is singular at t={t!r}, n={n}", t=t, n=n)
    return fac


def euler_formula(G: Generator, t: float, n: int, u: LpElement) -> LpElement:
    """Backward-Euler approximation ``(I - tG/n)^{-n} u`` of ``exp(tG) u``."""
    _require_element(G, u)
    t = _check_time(t)
    if int(n) != n or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    if t == 0:
        return u.with_values(u.values.copy(), nonneg=u.nonneg)
    return u.with_values(euler_factor(G, t, int(n)).power(u.values, int(n)))


def weighted_adjoint_matrix(matrix: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return matrix.T * weights[None, :] / weights[:, None]


def weighted_adjoint(G: Generator) -> Generator:
    """Adjoint of ``G`` with respect to the pairing weighted by the measure.

    Equals ``D^{-1} G^T D`` with ``D = diag(m)``.
    """
    return Generator(weighted_adjoint_matrix(G.matrix, G.space.weights), G.space)


def positivity_check(G: Generator) -> PositivityReport:
    a = G.matrix
    off = ~np.eye(G.n, dtype=bool)
    bad = np.argwhere(off & (a < 0))
    if bad.size == 0:
        return PositivityReport(True)
    i, j = (int(k) for k in bad[0])  # argwhere is row-major, i.e. lexicographic
    return PositivityReport(False, (i, j, float(a[i, j])))


def growth_bound(G: Generator, q: float) -> tuple[float, float]:
    """Certified ``(M, omega)`` with ``||exp(tG)u||_q <= M e^{omega t} ||u||_q``.

    Only available for Metzler ``G``.  ``M`` is always 1; ``omega`` is the
    largest weighted column sum for ``q = 1``, the largest row sum for
    ``q = inf``, and the larger of the two in between.
    """
    q = check_exponent(q)
    rep = positivity_check(G)
    if not rep.is_metzler:
        raise UnsupportedError(
            f"growth bound only certified for Metzler generators; entry {rep.violating_entry}"
        )
    w = G.space.weights
    omega_1 = float(np.max((w @ G.matrix) / w))
    omega_inf = float(np.max(G.matrix.sum(axis=1)))
    if q == 1:
        return 1.0, omega_1
    if q == INF:
        return 1.0, omega_inf
    return 1.0, max(omega_1, omega_inf)


def spectral_semigroup(G: Generator):
    """Spectral form of ``exp(tG)`` for generators self-adjoint in the weighted pairing.

    Returns ``(mu, left, right)`` with ``exp(tG) = left @ diag(exp(mu t)) @ right``,
    obtained from ``eigh`` of ``D^{1/2} G D^{-1/2}``.
    """
    w = G.space.weights
    adj = weighted_adjoint_matrix(G.matrix, w)
    if not np.allclose(adj, G.matrix, rtol=1e-12, atol=1e-12 * max(np.abs(G.matrix).max(), 1.0)):
        raise UnsupportedError("spectral path needs a weighted self-adjoint generator")
    r = np.sqrt(w)
    sym = G.matrix * r[:, None] / r[None, :]
    mu, q = np.linalg.eigh(0.5 * (sym + sym.T))
    return mu, q / r[:, None], q.T * r[None, :]
