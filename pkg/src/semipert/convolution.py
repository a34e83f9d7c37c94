"""Discrete convolution sums of scaled families and their integral limit.

A scaled family is a function ``phi(t, n, l)`` obeying
``phi(t, n, l) = phi(t*l/n, l, l)`` whose diagonal ``phi(., n, n)``
converges to a limit function.  For two such families the normalized sum

    1/(n-1) * sum_{l=1}^{n-1} phi(t, n-1, n-l) * psi(t, n-1, l)

tends to ``int_0^1 phi_lim(t(1-s)) psi_lim(ts) ds``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import ValidationError
from .operators import Generator, euler_factor, semigroup_matrix, weighted_adjoint
from .quadrature import QuadResult, simpson
from .space import LpElement


@dataclass(frozen=True, eq=False)
class ScaledFamily:
    eval: Callable[[float, int, int], float]
    limit: Callable[[float], float]
    # optional fast path: table(t, n, lmax) -> array of eval(t, n, l) for l = 0..lmax
    table: Callable[[float, int, int], np.ndarray] | None = field(default=None)
    name: str = "family"

    def values(self, t: float, n: int, ls: np.ndarray) -> np.ndarray:
        ls = np.asarray(ls, dtype=int)
        if self.table is not None:
            return self.table(t, n, int(ls.max()))[ls]
        return np.array([self.eval(t, n, int(l)) for l in ls])


def constant_family(c: float = 1.0) -> ScaledFamily:
    return ScaledFamily(lambda t, n, l: c, lambda t: c, name=f"constant({c})")


def linear_family() -> ScaledFamily:
    """``phi_n(t, l) = t l / n`` with limit ``phi(s) = s``."""
    return ScaledFamily(lambda t, n, l: t * l / n, lambda s: s, name="linear")


def scaling_law_defect(fam: ScaledFamily, points: Sequence[tuple[float, int, int]]) -> float:
    """Largest ``|eval(t, n, l) - eval(t l/n, l, l)|`` over the given points (``l >= 1``).

    Differences are taken relative to ``max(1, |a|, |b|)``, so for values of
    order one this is the absolute defect.
    """
    worst = 0.0
    for t, n, l in points:
        a = fam.eval(t, n, l)
        b = fam.eval(t * l / n, l, l)
        worst = max(worst, abs(a - b) / max(1.0, abs(a), abs(b)))
    return worst


def discrete_convolution_sum(phi: ScaledFamily, psi: ScaledFamily, t: float, n: int) -> float:
    if int(n) != n or n < 2:
        raise ValidationError(f"n must be an integer >= 2, got {n!r}")
    n = int(n)
    ls = np.arange(1, n)
    a = phi.values(t, n - 1, n - ls)
    b = psi.values(t, n - 1, ls)
    return float(np.dot(a, b) / (n - 1))


def limit_integral(phi_limit: Callable, psi_limit: Callable, t: float, panels: int = 256) -> QuadResult:
    """Simpson approximation of ``int_0^1 phi(t(1-s)) psi(ts) ds`` with Richardson error."""
    if panels < 2 or panels % 2:
        raise ValidationError(f"panels must be even and >= 2, got {panels}")

    def integrand(s):
        return np.array([phi_limit(t * (1 - x)) * psi_limit(t * x) for x in s])

    return simpson(integrand, 0.0, 1.0, panels)


def time_scaled_integral(phi_limit: Callable, psi_limit: Callable, t: float, panels: int = 256) -> QuadResult:
    """``int_0^t phi(t - s) psi(s) ds``; equals ``t`` times :func:`limit_integral`."""
    if panels < 2 or panels % 2:
        raise ValidationError(f"panels must be even and >= 2, got {panels}")

    def integrand(s):
        return np.array([phi_limit(t - x) * psi_limit(x) for x in s])

    return simpson(integrand, 0.0, t, panels)


@dataclass
class ConvergenceStudy:
    rows: list[dict]
    integral: float
    integral_error: float
    monotone: bool
    final_rate: float | None

    def to_csv_rows(self) -> list[list]:
        return [[r["n"], r["sum"], r["integral"], r["abs_error"], r["rate"]] for r in self.rows]


CSV_HEADER = ["n", "sum", "integral", "abs_error", "rate"]


def convergence_study(phi: ScaledFamily, psi: ScaledFamily, t: float, n_list: Sequence[int],
                      panels: int = 4096) -> ConvergenceStudy:
    """Errors of the discrete sums against the limit integral.

    ``rate`` is the observed order ``log(e_prev/e) / log(n/n_prev)``.
    """
    n_list = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValidationError("n_list must be strictly ascending")
    ref = limit_integral(phi.limit, psi.limit, t, panels)
    rows = []
    prev = None
    for n in n_list:
        s = discrete_convolution_sum(phi, psi, t, n)
        err = abs(s - float(ref.value))
        rate = None
        if prev is not None and prev[1] > 0 and err > 0:
            rate = math.log(prev[1] / err) / math.log(n / prev[0])
        rows.append({"n": n, "sum": s, "integral": float(ref.value), "abs_error": err, "rate": rate})
        prev = (n, err)
    errs = [r["abs_error"] for r in rows]
    monotone = all(b <= a for a, b in zip(errs, errs[1:]))
    return ConvergenceStudy(rows, float(ref.value), float(ref.error), monotone, rows[-1]["rate"])


def resolvent_pairing_family(G: Generator, vector: LpElement, test: LpElement,
                             side: str = "forward", check_grid: int = 32) -> ScaledFamily:
    """``eval(t, n, l) = <(I - tG/n)^{-l} vector, test>`` and limit ``<exp(tG) vector, test>``.

    ``side="adjoint"`` uses the weighted adjoint of ``G``.  The scaling law is
    verified on a small grid when the family is built.
    """
    G.space.require_same(vector.space)
    G.space.require_same(test.space)
    if side not in ("forward", "adjoint"):
        raise ValidationError(f"side must be 'forward' or 'adjoint', got {side!r}")
    if np.any(vector.values < 0) or np.any(test.values < 0):
        raise ValidationError("vector and test must be nonnegative")
    op = weighted_adjoint(G) if side == "adjoint" else G
    m = G.space.weights
    v0 = vector.values.copy()
    wt = test.values * m

    @lru_cache(maxsize=64)
    def _table(t: float, n: int, lmax: int) -> np.ndarray:
        out = np.empty(lmax + 1)
        x = v0
        out[0] = x @ wt
        if lmax:
            fac = euler_factor(op, t, n)
            for l in range(1, lmax + 1):
                x = fac.solve(x)
                out[l] = x @ wt
        out.setflags(write=False)
        return out

    def table(t, n, lmax):
        # extend by doubling so repeated queries reuse one cached sweep
        size = 1
        while size < lmax:
            size *= 2
        return _table(float(t), int(n), size)[: lmax + 1]

    def ev(t, n, l):
        return float(table(t, n, int(l))[int(l)])

    def lim(t):
        return float((semigroup_matrix(op, t) @ v0) @ wt)

    fam = ScaledFamily(ev, lim, table, name=f"resolvent_pairing[{side}]")
    if check_grid:
        rng = np.random.default_rng(0)
        pts = [(float(rng.uniform(0, 2)), int(rng.integers(1, 40)), int(rng.integers(1, 40)))
               for _ in range(check_grid)]
        defect = scaling_law_defect(fam, pts)
        if defect > 1e-12:
            raise ValidationError(f"scaling law violated by {defect:g}")
    return fam
