"""Executable versions of the generator, resolvent and semigroup estimates.

All three conditions compare a perturbed semigroup ``T = exp(t G_T)`` with a
reference ``S = exp(t G_S)``.  In pairing mode every term is bilinear in the
test pair ``(u, v')`` on the positive cone, so testing ``u = e_y``,
``v' = e_x`` for all sites ``(x, y)`` is exhaustive.  Norm mode with ``q = 1``
is exact for the same reason (``||u||_1 = <u, 1>`` on the cone); any other
``q`` is checked on seeded random samples and labelled ``"sampled"``.

Margins are ``RHS - LHS`` in pairing units.  Sites are reported as
``(x, y)``: ``x`` indexes ``v'`` (matrix row), ``y`` indexes ``u`` (column).
Ties are broken by scanning ``y`` first, then ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import PreconditionError, ResolventSetError, UnsupportedError, ValidationError
from .operators import (
    Generator,
    euler_factor,
    growth_bound,
    positivity_check,
    resolvent_factor,
    semigroup_matrix,
)
from .quadrature import simpson_nodes
from .space import LpElement, _lp_norm, check_exponent, format_exponent

MODES = ("pairing", "norm", "strong")

GENERATOR_RTOL = 1e-12
RESOLVENT_ATOL = 1e-9  # applied to lambda**2 * margin
SEMIGROUP_ATOL = 1e-9
LAMBDA_MARGIN = 1.0
DEFAULT_SAMPLES = 1000
DEFAULT_QUAD_STEPS = 256


@dataclass(frozen=True, eq=False)
class EstimateInstance:
    """Two generators plus the data ``f, g', C, p, q`` of a perturbation estimate.

    ``gprime`` may be ``None`` in norm and strong mode, where it is unused.
    """

    G_S: Generator
    G_T: Generator
    f: LpElement
    gprime: LpElement | None
    C: float = 0.0
    p: float = 2.0
    q: float = 2.0
    mode: str = "pairing"
    seed: int = 0
    samples: int = DEFAULT_SAMPLES

    def __post_init__(self):
        sp = self.G_S.space
        sp.require_same(self.G_T.space)
        sp.require_same(self.f.space)
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if np.any(self.f.values < 0):
            raise ValidationError("f must be nonnegative")
        if self.gprime is not None:
            sp.require_same(self.gprime.space)
            if np.any(self.gprime.values < 0):
                raise ValidationError("g' must be nonnegative")
        elif self.mode == "pairing":
            raise ValidationError("pairing mode needs g'")
        if not np.isfinite(self.C) or self.C < 0:
            raise ValidationError(f"C must be finite and >= 0, got {self.C!r}")
        object.__setattr__(self, "p", check_exponent(self.p))
        object.__setattr__(self, "q", check_exponent(self.q))
        for name in ("G_S", "G_T"):
            rep = positivity_check(getattr(self, name))
            if not rep.is_metzler:
                raise PreconditionError(
                    f"{name} is not Metzler (entry {rep.violating_entry}); "
                    "the estimates are stated for positive semigroups",
                    criterion="positivity",
                )

    @property
    def space(self):
        return self.G_S.space

    @property
    def n(self) -> int:
        return self.G_S.n

    def with_C(self, C: float) -> "EstimateInstance":
        return EstimateInstance(
            self.G_S, self.G_T, self.f, self.gprime, float(C), self.p, self.q,
            self.mode, self.seed, self.samples,
        )

    def with_mode(self, mode: str, q: float | None = None) -> "EstimateInstance":
        return EstimateInstance(
            self.G_S, self.G_T, self.f, self.gprime, self.C, self.p,
            self.q if q is None else q, mode, self.seed, self.samples,
        )

    @property
    def exact(self) -> bool:
        return self.mode == "pairing" or self.q == 1

    def omega(self) -> float:
        return growth_bound(self.G_T, self.q)[1]

    def omega_bar(self) -> float:
        return max(growth_bound(self.G_S, self.p)[1], growth_bound(self.G_T, self.q)[1])


def default_lambdas(inst: EstimateInstance) -> list[float]:
    base = max(inst.omega_bar() + 2.0, 1.0)
    return [base, 2 * base, 4 * base, 8 * base]


@dataclass
class Verdict:
    """Outcome of a check.

    ``holds`` is ``worst_margin >= -tolerance``.  ``status`` refines it:
    ``"inconclusive"`` means some margin is negative but within the
    quadrature band, ``"fails"`` means it is not.
    """

    check: str
    holds: bool
    status: str
    worst_margin: float
    worst_site: dict | None
    tolerance: float
    error_band: float = 0.0
    method: str = "exact"
    details: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def passes(self) -> bool:
        return self.status != "fails"

    def to_dict(self, with_details: bool = True) -> dict:
        d = {
            "check": self.check,
            "status": self.status,
            "holds": self.holds,
            "worst_margin": self.worst_margin,
            "worst_site": self.worst_site,
            "tolerance": self.tolerance,
            "error_band": self.error_band,
            "method": self.method,
            "info": self.info,
        }
        if with_details:
            d["details"] = self.details
        return d


def _site_status(margin, band, tol):
    if margin >= -tol:
        return "holds"
    if margin >= -(tol + band):
        return "inconclusive"
    return "fails"


class _Collector:
    """Accumulates per-site margins in scan order and reduces them to a Verdict."""

    def __init__(self, check: str, method: str = "exact"):
        self.check = check
        self.method = method
        self.rows: list[dict] = []
        self._worst = None
        self._status = "holds"
        self._band = 0.0
        self._tol = 0.0

    def add_block(self, margins, lhs, rhs, tol, band=None, label=None, col_name="y"):
        """Add an ``(n_x, n_cols)`` block; columns are scanned before rows."""
        margins = np.asarray(margins, dtype=float)
        band = np.zeros_like(margins) if band is None else np.broadcast_to(band, margins.shape)
        label = label or {}
        self._tol = max(self._tol, tol)
        nx, ny = margins.shape
        for y in range(ny):
            for x in range(nx):
                mg = float(margins[x, y])
                bd = float(band[x, y])
                st = _site_status(mg, bd, tol)
                site = {**label, "x": x, col_name: y}
                self.rows.append(
                    {**site, "lhs": float(lhs[x, y]), "rhs": float(rhs[x, y]),
                     "margin": mg, "band": bd, "status": st}
                )
                if self._worst is None or mg < self._worst[0]:
                    self._worst = (mg, site, tol)
                self._band = max(self._band, bd)
                if st == "fails" or (st == "inconclusive" and self._status == "holds"):
                    self._status = st

    def verdict(self, info=None) -> Verdict:
        if self._worst is None:
            return Verdict(self.check, True, "holds", 0.0, None, 0.0, 0.0, self.method, [], info or {})
        mg, site, _ = self._worst
        holds = all(r["status"] == "holds" for r in self.rows)
        return Verdict(
            self.check, holds, self._status if not holds else "holds", mg, site,
            self._tol, self._band, self.method, self.rows, info or {},
        )


def _test_vectors(inst: EstimateInstance) -> tuple[np.ndarray, str]:
    """Columns to use as ``u``: basis vectors when exact, seeded |N(0,1)| draws otherwise."""
    n = inst.n
    if inst.exact:
        return np.eye(n), "exact"
    rng = np.random.default_rng(inst.seed)
    return np.abs(rng.standard_normal((n, inst.samples))), "sampled"


def _norms(cols: np.ndarray, weights: np.ndarray, q: float) -> np.ndarray:
    return np.array([_lp_norm(cols[:, s], weights, q) for s in range(cols.shape[1])])


# ---------------------------------------------------------------------------
# generator condition


def _generator_bound(inst: EstimateInstance) -> tuple[np.ndarray, np.ndarray]:
    """Reduced (divided by ``m_x``) difference and bound matrices for basis ``u``."""
    m = inst.space.weights
    diff = inst.G_T.matrix - inst.G_S.matrix
    if inst.mode == "pairing":
        col = inst.gprime.values * m
    else:
        col = m  # ||e_y||_1
    bound = inst.C * np.outer(inst.f.values, col)
    return diff, bound


def check_generator_condition(inst: EstimateInstance) -> Verdict:
    """Condition ``<G_T u, v'> <= <u, G_S^sigma v'> + C <u, g'> <f, v'>`` (or its norm form)."""
    if inst.mode == "strong":
        inst = inst.with_mode("norm")
    m = inst.space.weights
    if inst.exact:
        diff, bound = _generator_bound(inst)
        lhs = m[:, None] * diff
        rhs = m[:, None] * bound
        scale = max(float(np.abs(lhs).max()), float(np.abs(rhs).max()), 1e-300)
        col = _Collector("generator")
        col.add_block(rhs - lhs, lhs, rhs, GENERATOR_RTOL * scale)
        return col.verdict({"mode": inst.mode, "C": inst.C, "q": format_exponent(inst.q)})
    u, method = _test_vectors(inst)
    diff = inst.G_T.matrix - inst.G_S.matrix
    lhs = m[:, None] * (diff @ u)
    rhs = inst.C * np.outer(m * inst.f.values, _norms(u, m, inst.q))
    scale = max(float(np.abs(lhs).max()), float(np.abs(rhs).max()), 1e-300)
    col = _Collector("generator", method)
    col.add_block(rhs - lhs, lhs, rhs, GENERATOR_RTOL * scale, col_name="sample")
    return col.verdict({"mode": inst.mode, "C": inst.C, "q": format_exponent(inst.q),
                        "samples": inst.samples, "seed": inst.seed})


@dataclass(frozen=True)
class MinimalC:
    value: float | None
    site: dict | None
    infeasible: bool = False

    def to_dict(self) -> dict:
        return {"value": self.value, "site": self.site, "infeasible": self.infeasible}


def minimal_C(inst: EstimateInstance) -> MinimalC:
    """Smallest ``C`` for which the generator condition holds (exact modes only).

    ``C* = max (G_T - G_S)_xy^+ / (g'_y m_y f_x)``; a positive difference over
    a zero denominator makes every ``C`` fail and is reported as infeasible
    with that site as witness.
    """
    if inst.mode == "strong":
        inst = inst.with_mode("norm")
    if not inst.exact:
        raise UnsupportedError("minimal_C needs pairing mode or norm mode with q = 1")
    diff, den = _generator_bound(inst.with_C(1.0))
    best, site = 0.0, None
    n = inst.n
    for y in range(n):
        for x in range(n):
            d = diff[x, y]
            if d <= 0:
                continue
            if den[x, y] == 0:
                return MinimalC(None, {"x": x, "y": y, "difference": float(d)}, True)
            r = d / den[x, y]
            if r > best:
                best, site = r, {"x": x, "y": y}
    return MinimalC(float(best), site)


# ---------------------------------------------------------------------------
# resolvent condition and its n-fold iteration


def _check_lambda(inst: EstimateInstance, lam: float) -> None:
    thr = inst.omega_bar() + LAMBDA_MARGIN
    if not lam > thr:
        raise ResolventSetError(
            f"lambda={lam!r} is not above the certified threshold {thr!r} "
            "(largest growth bound + 1)",
            lam=lam,
        )


def _resolvent_blocks(inst: EstimateInstance, lam: float, n: int, u: np.ndarray):
    """LHS and RHS of the ``n``-fold resolvent inequality for the columns of ``u``."""
    m = inst.space.weights
    fac_t = resolvent_factor(inst.G_T, lam)
    fac_s = resolvent_factor(inst.G_S, lam)
    t_pows = fac_t.powers(u, n)  # R_T^k u, k = 0..n
    s_pow_n = fac_s.power(u, n)
    f_pows = fac_s.powers(inst.f.values, n)  # R_S^l f
    lhs = m[:, None] * t_pows[n]
    rhs1 = m[:, None] * s_pow_n
    extra = np.zeros_like(lhs)
    if inst.mode == "pairing":
        wg = inst.gprime.values * m
        for l in range(1, n + 1):
            extra += np.outer(m * f_pows[l], t_pows[n + 1 - l].T @ wg)
        extra *= inst.C
    else:
        omega = inst.omega()
        if not lam > omega:
            raise ResolventSetError(f"lambda={lam!r} must exceed omega={omega!r}", lam=lam)
        for l in range(1, n + 1):
            extra += np.outer(m * f_pows[l], _norms(t_pows[n - l], m, inst.q))
        extra *= inst.C / (lam - omega)
    return lhs, rhs1 + extra


def resolvent_iteration_expansion(inst: EstimateInstance, lam: float, n: int) -> Verdict:
    """Both sides of the ``n``-fold resolvent inequality obtained by induction."""
    if inst.mode == "strong":
        raise UnsupportedError("use check_strong_condition for the strong form")
    if int(n) != n or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    lam = float(lam)
    _check_lambda(inst, lam)
    u, method = _test_vectors(inst)
    lhs, rhs = _resolvent_blocks(inst, lam, int(n), u)
    col = _Collector("resolvent_expansion" if n > 1 else "resolvent", method)
    s = lam * lam
    col.add_block(s * (rhs - lhs), s * lhs, s * rhs, RESOLVENT_ATOL,
                  label={"lambda": lam}, col_name="y" if method == "exact" else "sample")
    return col.verdict({"mode": inst.mode, "C": inst.C, "n": int(n), "margin_scaling": "lambda^2"})


def check_resolvent_condition(inst: EstimateInstance, lambdas: Sequence[float] | None = None) -> Verdict:
    """Resolvent form of the estimate on a grid of ``lambda`` (margins scaled by ``lambda^2``)."""
    if inst.mode == "strong":
        return check_strong_resolvent_condition(inst, lambdas)
    lambdas = default_lambdas(inst) if lambdas is None else [float(x) for x in lambdas]
    u, method = _test_vectors(inst)
    col = _Collector("resolvent", method)
    for lam in lambdas:
        _check_lambda(inst, lam)
        lhs, rhs = _resolvent_blocks(inst, lam, 1, u)
        s = lam * lam
        col.add_block(s * (rhs - lhs), s * lhs, s * rhs, RESOLVENT_ATOL,
                      label={"lambda": lam}, col_name="y" if method == "exact" else "sample")
    return col.verdict({"mode": inst.mode, "C": inst.C, "lambdas": lambdas,
                        "margin_scaling": "lambda^2"})


# ---------------------------------------------------------------------------
# semigroup (variation of constants) condition


def _propagated(E: np.ndarray, v: np.ndarray, steps: int) -> np.ndarray:
    """``[v, E v, ..., E^steps v]`` stacked along axis 0."""
    out = np.empty((steps + 1,) + v.shape)
    out[0] = v
    for k in range(1, steps + 1):
        out[k] = E @ out[k - 1]
    return out


def _semigroup_blocks(inst: EstimateInstance, t: float, quad_steps: int, u: np.ndarray):
    """LHS, RHS and per-site quadrature band of the semigroup inequality at time ``t``."""
    m = inst.space.weights
    lhs = m[:, None] * (semigroup_matrix(inst.G_T, t) @ u)
    rhs1 = m[:, None] * (semigroup_matrix(inst.G_S, t) @ u)
    if t == 0 or inst.C == 0:
        return lhs, rhs1, np.zeros_like(lhs)
    fine = 2 * quad_steps
    h = t / fine
    # nodes s_k = k h; S(s_k) f by repeated multiplication with exp(h G_S)
    sf = _propagated(semigroup_matrix(inst.G_S, h), inst.f.values, fine)  # (fine+1, n)
    b = sf * m[None, :]  # <f, S(s)' e_x> = m_x (S(s) f)_x
    if inst.mode == "pairing":
        # <T(t - s) u, g'> = u . T(t-s)^T D g'; T(tau_k)^T D g' propagated with exp(h G_T)^T
        w = _propagated(semigroup_matrix(inst.G_T, h).T, inst.gprime.values * m, fine)
        a = w[::-1] @ u  # row k holds time t - s_k
        nodes = b[:, :, None] * a[:, None, :]
    else:
        omega = inst.omega()
        s = np.linspace(0.0, t, fine + 1)
        growth = np.exp(omega * (t - s))
        norms = _norms(u, m, inst.q)
        nodes = (growth[:, None] * b)[:, :, None] * norms[None, None, :]
    res = simpson_nodes(nodes, t)
    extra = inst.C * res.value
    band = inst.C * res.error
    return lhs, rhs1 + extra, band


def check_semigroup_condition(
    inst: EstimateInstance,
    times: Sequence[float],
    quad_steps: int = DEFAULT_QUAD_STEPS,
) -> Verdict:
    """Variation-of-constants inequality at each ``t`` via composite Simpson in ``s``."""
    if inst.mode == "strong":
        return check_strong_condition(inst, times, quad_steps)
    _check_quad(quad_steps)
    u, method = _test_vectors(inst)
    col = _Collector("semigroup", method)
    for t in times:
        t = float(t)
        if t < 0:
            raise ValidationError(f"time must be >= 0, got {t}")
        lhs, rhs, band = _semigroup_blocks(inst, t, quad_steps, u)
        col.add_block(rhs - lhs, lhs, rhs, SEMIGROUP_ATOL, band,
                      label={"t": t}, col_name="y" if method == "exact" else "sample")
    return col.verdict({"mode": inst.mode, "C": inst.C, "times": [float(t) for t in times],
                        "quad_steps": quad_steps})


def _check_quad(quad_steps: int) -> None:
    if int(quad_steps) != quad_steps or quad_steps < 2 or quad_steps % 2:
        raise ValidationError(f"quad_steps must be an even integer >= 2, got {quad_steps!r}")


def small_time_scan(inst: EstimateInstance, site: dict, kmax: int = 20,
                    quad_steps: int = DEFAULT_QUAD_STEPS) -> dict:
    """Evaluate the semigroup margin at ``site`` for ``t = 2^-k``, ``k = 1..kmax``.

    Returns the first ``t`` at which the site fails (``None`` if none does)
    and the margin trace.
    """
    x, y = site["x"], site["y"]
    u = np.zeros((inst.n, 1))
    u[y, 0] = 1.0
    trace = []
    first = None
    for k in range(1, kmax + 1):
        t = 2.0 ** -k
        lhs, rhs, band = _semigroup_blocks(inst, t, quad_steps, u)
        mg = float(rhs[x, 0] - lhs[x, 0])
        st = _site_status(mg, float(band[x, 0]), SEMIGROUP_ATOL)
        trace.append({"t": t, "margin": mg, "band": float(band[x, 0]), "status": st})
        if st == "fails" and first is None:
            first = t
    return {"site": {"x": x, "y": y}, "first_failure_t": first, "trace": trace}


def euler_path_margins(inst: EstimateInstance, t: float, n: int) -> np.ndarray:
    """Margins of the discrete inequality with ``exp(tG)`` replaced by ``(I - tG/n)^{-n}``.

    RHS integral term becomes ``C t/n sum_{l=1}^n <R_T^{n+1-l} u, g'> <f, (R_S^sigma)^l v'>``
    with ``R = (I - tG/n)^{-1}``.  Pairing mode, basis test pairs.
    """
    if inst.mode != "pairing":
        raise UnsupportedError("Euler-path margins are implemented for pairing mode")
    m = inst.space.weights
    u = np.eye(inst.n)
    ft = euler_factor(inst.G_T, t, n)
    fs = euler_factor(inst.G_S, t, n)
    t_pows = ft.powers(u, n + 1)
    lhs = m[:, None] * t_pows[n]
    rhs = m[:, None] * fs.power(u, n)
    f_pows = fs.powers(inst.f.values, n)
    wg = inst.gprime.values * m
    extra = np.zeros_like(lhs)
    for l in range(1, n + 1):
        extra += np.outer(m * f_pows[l], t_pows[n + 1 - l].T @ wg)
    return rhs + inst.C * (t / n) * extra - lhs


def exact_semigroup_margins(inst: EstimateInstance, t: float, quad_steps: int = DEFAULT_QUAD_STEPS) -> np.ndarray:
    lhs, rhs, _ = _semigroup_blocks(inst, float(t), quad_steps, np.eye(inst.n))
    return rhs - lhs


# ---------------------------------------------------------------------------
# strong (vector) form, q = 1


def _strong_check_q(inst: EstimateInstance) -> float:
    if inst.q != 1:
        raise UnsupportedError("the strong form is implemented for q = 1")
    return inst.omega()


def check_strong_condition(
    inst: EstimateInstance,
    times: Sequence[float],
    quad_steps: int = DEFAULT_QUAD_STEPS,
    lambdas: Sequence[float] | None = None,
) -> Verdict:
    """Entrywise ``T(t)u <= S(t)u + C int_0^t e^{omega(t-s)} ||u||_1 S(s) f ds``.

    ``u`` ranges over basis vectors and every coordinate is compared, which
    is the same as testing against all nonnegative ``v'``.  When ``lambdas``
    is given the resolvent form is checked too and merged into the verdict.
    """
    _check_quad(quad_steps)
    omega = _strong_check_q(inst)
    m = inst.space.weights
    col = _Collector("strong")
    fine = 2 * quad_steps
    for t in times:
        t = float(t)
        if t < 0:
            raise ValidationError(f"time must be >= 0, got {t}")
        lhs = semigroup_matrix(inst.G_T, t)
        rhs = semigroup_matrix(inst.G_S, t).copy()
        band = np.zeros_like(lhs)
        if t > 0 and inst.C > 0:
            h = t / fine
            sf = _propagated(semigroup_matrix(inst.G_S, h), inst.f.values, fine)
            s = np.linspace(0.0, t, fine + 1)
            res = simpson_nodes(np.exp(omega * (t - s))[:, None] * sf, t)
            rhs = rhs + inst.C * np.outer(res.value, m)  # ||e_y||_1 = m_y
            band = inst.C * np.outer(res.error, m)
        col.add_block(rhs - lhs, lhs, rhs, SEMIGROUP_ATOL, band, label={"t": t})
    v = col.verdict({"C": inst.C, "omega": omega, "times": [float(t) for t in times],
                     "quad_steps": quad_steps})
    if lambdas is None:
        return v
    r = check_strong_resolvent_condition(inst, lambdas)
    return _merge("strong", [v, r])


def check_strong_resolvent_condition(inst: EstimateInstance, lambdas: Sequence[float] | None = None) -> Verdict:
    """Entrywise ``(l - G_T)^{-1}u <= (l - G_S)^{-1}u + C/(l - omega) ||u||_1 (l - G_S)^{-1} f``."""
    omega = _strong_check_q(inst)
    lambdas = default_lambdas(inst) if lambdas is None else [float(x) for x in lambdas]
    m = inst.space.weights
    n = inst.n
    col = _Collector("strong_resolvent")
    for lam in lambdas:
        _check_lambda(inst, lam)
        ft = resolvent_factor(inst.G_T, lam)
        fs = resolvent_factor(inst.G_S, lam)
        lhs = ft.solve(np.eye(n))
        rhs = fs.solve(np.eye(n)) + inst.C / (lam - omega) * np.outer(fs.solve(inst.f.values), m)
        s = lam * lam
        col.add_block(s * (rhs - lhs), s * lhs, s * rhs, RESOLVENT_ATOL, label={"lambda": lam})
    return col.verdict({"C": inst.C, "omega": omega, "lambdas": lambdas, "margin_scaling": "lambda^2"})


def _merge(check: str, verdicts: list[Verdict]) -> Verdict:
    worst = min(verdicts, key=lambda v: v.worst_margin)
    order = {"holds": 0, "inconclusive": 1, "fails": 2}
    status = max((v.status for v in verdicts), key=order.__getitem__)
    rows = [{"part": v.check, **r} for v in verdicts for r in v.details]
    site = None if worst.worst_site is None else {"part": worst.check, **worst.worst_site}
    return Verdict(
        check, all(v.holds for v in verdicts), status, worst.worst_margin, site,
        max(v.tolerance for v in verdicts), max(v.error_band for v in verdicts),
        "exact", rows, {v.check: v.info for v in verdicts},
    )
