"""Bilinear forms, jump-kernel perturbations and Ouhabaz-type criteria.

A :class:`BilinearForm` stores the coefficient matrix ``K`` of
``tau(u, v) = sum_ij v_i K_ij u_j``.  The operator associated with the form
is ``A = D^{-1} K`` (``D = diag(m)``) and the semigroup generator is
``G = -A``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, InvalidKernelError, ValidationError
from .operators import Generator, positivity_check
from .space import INF, LpElement, MeasureSpace, lp_norm

POSITIVITY_RTOL = 1e-12
SCAN_RTOL = 1e-10
ACCRETIVE_RTOL = 1e-10
_PROBE_EPS = 0.5


def _scale(a: np.ndarray) -> float:
    s = float(np.abs(a).max()) if a.size else 0.0
    return s if s > 0 else 1.0


@dataclass(frozen=True, eq=False)
class BilinearForm:
    coeffs: np.ndarray
    space: MeasureSpace

    def __post_init__(self):
        k = np.array(self.coeffs, dtype=float)
        n = self.space.n
        if k.shape != (n, n):
            raise DimensionError(f"form has shape {k.shape}, space has {n} atoms")
        if not np.all(np.isfinite(k)):
            raise ValidationError("form coefficients must be finite")
        k.setflags(write=False)
        object.__setattr__(self, "coeffs", k)

    @property
    def n(self) -> int:
        return self.space.n

    def __call__(self, u, v=None) -> float:
        u = u.values if isinstance(u, LpElement) else np.asarray(u, dtype=float)
        v = u if v is None else (v.values if isinstance(v, LpElement) else np.asarray(v, dtype=float))
        return float(v @ self.coeffs @ u)

    def __add__(self, other: "BilinearForm") -> "BilinearForm":
        self.space.require_same(other.space)
        return BilinearForm(self.coeffs + other.coeffs, self.space)

    def is_symmetric(self) -> bool:
        return bool(np.allclose(self.coeffs, self.coeffs.T, rtol=0, atol=1e-14 * _scale(self.coeffs)))


@dataclass(frozen=True, eq=False)
class JumpKernel:
    j: np.ndarray
    space: MeasureSpace

    def __post_init__(self):
        a = np.array(self.j, dtype=float)
        n = self.space.n
        if a.shape != (n, n):
            raise DimensionError(f"jump kernel has shape {a.shape}, space has {n} atoms")
        if not np.all(np.isfinite(a)):
            raise InvalidKernelError("jump kernel entries must be finite")
        if np.any(a < 0):
            i, k = np.argwhere(a < 0)[0]
            raise InvalidKernelError(f"jump kernel entry ({i}, {k}) = {a[i, k]} is negative")
        a.setflags(write=False)
        object.__setattr__(self, "j", a)

    def scaled(self, factor: float) -> "JumpKernel":
        return JumpKernel(self.j * float(factor), self.space)


def graph_laplacian_form(space: MeasureSpace, edges: Iterable[Sequence[float]]) -> BilinearForm:
    """``tau_0(u, v) = sum_edges w (u_a - u_b)(v_a - v_b)`` from ``(a, b, w)`` triples."""
    k = np.zeros((space.n, space.n))
    for e in edges:
        a, b, w = int(e[0]), int(e[1]), float(e[2])
        if not (0 <= a < space.n and 0 <= b < space.n):
            raise DimensionError(f"edge ({a}, {b}) out of range for n={space.n}")
        if w < 0 or not np.isfinite(w):
            raise ValidationError(f"edge ({a}, {b}) has invalid conductance {w}")
        if a == b:
            continue
        k[a, a] += w
        k[b, b] += w
        k[a, b] -= w
        k[b, a] -= w
    return BilinearForm(k, space)


def assemble_jump_form(j: JumpKernel) -> BilinearForm:
    """Coefficients of ``sum_xy (u_x - u_y)(v_x - v_y) j(x,y) m_x m_y``."""
    m = j.space.weights
    a = j.j
    diag = m * (a @ m + a.T @ m)
    k = np.diag(diag) - np.outer(m, m) * (a + a.T)
    return BilinearForm(k, j.space)


def perturbed_form(tau0: BilinearForm, j: JumpKernel) -> BilinearForm:
    tau0.space.require_same(j.space)
    return tau0 + assemble_jump_form(j)


def associated_generator(form: BilinearForm) -> Generator:
    """Semigroup generator ``G = -D^{-1} K`` of the operator associated with the form."""
    return Generator(-form.coeffs / form.space.weights[:, None], form.space)


@dataclass
class CriterionResult:
    """Verdict of a form criterion together with a witness vector when it fails.

    ``matrix_verdict`` is the exact finite-dimensional condition and
    ``scan_verdict`` the outcome of the functional scan (``None`` if no
    scan was run).  ``consistent`` is ``False`` whenever the two disagree.
    """

    holds: bool
    witness: np.ndarray | None = None
    value: float | None = None
    matrix_verdict: bool | None = None
    scan_verdict: bool | None = None
    details: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        if self.matrix_verdict is None or self.scan_verdict is None:
            return True
        return self.matrix_verdict == self.scan_verdict

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "witness": None if self.witness is None else self.witness.tolist(),
            "value": self.value,
            "matrix_verdict": self.matrix_verdict,
            "scan_verdict": self.scan_verdict,
            "consistent": self.consistent,
            **self.details,
        }


def accretivity_check(form: BilinearForm, samples: int = 0, seed: int = 0) -> CriterionResult:
    """Accretive iff the symmetric part of ``K`` is positive semidefinite.

    ``samples`` random vectors are additionally tested for ``tau(u,u) < 0``.
    """
    k = form.coeffs
    sym = 0.5 * (k + k.T)
    vals, vecs = np.linalg.eigh(sym)
    floor = -ACCRETIVE_RTOL * _scale(k)
    matrix_ok = bool(vals[0] >= floor)
    witness = None if matrix_ok else vecs[:, 0]
    scan_ok = None
    if samples:
        rng = np.random.default_rng(seed)
        u = rng.standard_normal((samples, form.n))
        q = np.einsum("si,ij,sj->s", u, k, u)
        scan_ok = bool(np.all(q >= floor * np.einsum("si,si->s", u, u)))
        if not scan_ok and witness is None:
            witness = u[int(np.argmin(q))]
    holds = matrix_ok and scan_ok is not False
    return CriterionResult(
        holds,
        witness,
        None if witness is None else form(witness),
        matrix_ok,
        scan_ok,
        {"min_eigenvalue": float(vals[0])},
    )


def ouhabaz_positivity(form: BilinearForm) -> CriterionResult:
    """Positivity of the induced semigroup via ``tau(e_i, e_j) <= 0`` for ``i != j``.

    In finite dimension ``tau(u+, u-)`` is a nonnegative combination of these
    basis values, so the scan over pairs is exhaustive.
    """
    k = form.coeffs
    tol = POSITIVITY_RTOL * _scale(k)
    # tau(e_i, e_j) = K[j, i]
    for i in range(form.n):
        for j in range(form.n):
            if i != j and k[j, i] > tol:
                w = np.zeros(form.n)
                w[i], w[j] = 1.0, -1.0
                return CriterionResult(
                    False, w, float(k[j, i]), False, None, {"pair": [i, j]}
                )
    return CriterionResult(True, matrix_verdict=True)


def _scan_vectors(n: int, samples: int, seed: int) -> np.ndarray:
    """Deterministic probes ``1 + eps e_i`` followed by seeded random vectors."""
    probes = np.ones((n, n)) + _PROBE_EPS * np.eye(n)
    rng = np.random.default_rng(seed)
    rand = rng.uniform(-0.5, 2.5, size=(samples, n))
    # snap a share of entries to exactly 1 so that u ∧ 1 and (u-1)+ interact
    rand[rng.random((samples, n)) < 0.25] = 1.0
    return np.vstack([probes, rand])


def _contractivity(form: BilinearForm, samples: int, seed: int, *, dual: bool) -> CriterionResult:
    gen = associated_generator(form)
    g = gen.matrix
    m = form.space.weights
    g_tol = POSITIVITY_RTOL * _scale(g)
    metzler = positivity_check(gen).is_metzler
    sums = (m @ g) if dual else g.sum(axis=1)
    matrix_ok = bool(metzler and np.all(sums <= g_tol))

    k = form.coeffs
    floor = -SCAN_RTOL * _scale(k)
    worst = np.inf
    witness = None
    for u in _scan_vectors(form.n, samples, seed):
        cap = np.minimum(u, 1.0)
        excess = np.maximum(u - 1.0, 0.0)
        val = form(excess, cap) if dual else form(cap, excess)
        if val < worst:
            worst = val
            if val < floor:
                witness = u
    # the criterion bundles positivity, so the form-level side includes the basis test
    pos = ouhabaz_positivity(form)
    scan_ok = witness is None and pos.holds
    value = None if witness is None else float(worst)
    if witness is None and not pos.holds:
        witness, value = pos.witness, pos.value
    holds = matrix_ok and scan_ok
    name = "weighted_column_sums" if dual else "row_sums"
    return CriterionResult(
        holds,
        witness,
        value,
        matrix_ok,
        scan_ok,
        {"metzler": metzler, name: sums.tolist(), "min_scan_value": float(worst)},
    )


def ouhabaz_linf_contractive(form: BilinearForm, samples: int = 200, seed: int = 0) -> CriterionResult:
    """Positivity plus L_inf-contractivity: ``tau(u ∧ 1, (u-1)+) >= 0``.

    The exact condition is Metzler ``G`` with nonpositive row sums; the
    functional scan can only overturn it, never rescue it.
    """
    return _contractivity(form, samples, seed, dual=False)


def ouhabaz_l1_contractive(form: BilinearForm, samples: int = 200, seed: int = 0) -> CriterionResult:
    """Positivity plus L_1-contractivity: ``tau((u-1)+, u ∧ 1) >= 0``."""
    return _contractivity(form, samples, seed, dual=True)


@dataclass(frozen=True)
class JumpProfiles:
    rowsup: LpElement
    colsup: LpElement
    rowint: LpElement
    colint: LpElement
    f_j: LpElement
    rowint_sup: float
    colint_sup: float
    f_norms: dict

    def to_dict(self) -> dict:
        return {
            "rowsup": self.rowsup.values.tolist(),
            "colsup": self.colsup.values.tolist(),
            "rowint": self.rowint.values.tolist(),
            "colint": self.colint.values.tolist(),
            "f_j": self.f_j.values.tolist(),
            "rowint_sup": self.rowint_sup,
            "colint_sup": self.colint_sup,
            "f_norms": {str(k): v for k, v in self.f_norms.items()},
        }


def jump_profiles(j: JumpKernel, p: float = 1.0, norms: Sequence[float] = (1.0, 2.0, INF)) -> JumpProfiles:
    """Row/column suprema and integrals of ``j``; ``f_j = rowsup + colsup``."""
    sp = j.space
    m = sp.weights
    a = j.j
    rowsup = a.max(axis=1)
    colsup = a.max(axis=0)
    rowint = a @ m
    colint = a.T @ m

    def el(v):
        return LpElement(v, p, sp, nonneg=True)

    f = el(rowsup + colsup)
    return JumpProfiles(
        el(rowsup),
        el(colsup),
        el(rowint),
        el(colint),
        f,
        float(rowint.max()),
        float(colint.max()),
        {("inf" if q == INF else float(q)): lp_norm(f, q) for q in norms},
    )


def jump_generator_bound(G_S: Generator, G_T: Generator, j: JumpKernel):
    """Check ``(G_T - G_S)`` against ``||u||_1 <f_j, v'>`` entrywise with constant 1."""
    from .estimates import EstimateInstance, check_generator_condition

    G_S.space.require_same(G_T.space)
    G_S.space.require_same(j.space)
    f = jump_profiles(j).f_j
    inst = EstimateInstance(G_S, G_T, f, None, C=1.0, p=1.0, q=1.0, mode="norm")
    return check_generator_condition(inst)
