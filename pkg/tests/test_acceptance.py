"""Acceptance suite: one test per criterion, each recording a pass/fail line."""

import subprocess
import sys
import time

import numpy as np
import pytest
import scipy.integrate

from semipert import (
    BilinearForm,
    Generator,
    JumpKernel,
    LpElement,
    MeasureSpace,
    associated_generator,
    dual_exponent,
    dual_pairing,
    euler_formula,
    graph_laplacian_form,
    lp_norm,
    ouhabaz_l1_contractive,
    ouhabaz_linf_contractive,
    ouhabaz_positivity,
    perturbed_form,
    positivity_check,
    semigroup_apply,
    weighted_adjoint,
)
from semipert.convolution import (
    constant_family,
    convergence_study,
    discrete_convolution_sum,
    linear_family,
    resolvent_pairing_family,
    scaling_law_defect,
)
from semipert.estimates import (
    EstimateInstance,
    check_generator_condition,
    check_resolvent_condition,
    check_semigroup_condition,
    minimal_C,
    small_time_scan,
)
from semipert.kernels import check_jump_kernel_theorem, extract_kernel, jump_setup
from semipert.operators import spectral_semigroup
from semipert.scenario import (
    bundled_scenarios,
    cycle_edges,
    path_edges,
    random_connected_edges,
    random_jump_matrix,
    random_metzler_pair,
)

from conftest import random_metzler

pytestmark = pytest.mark.acceptance


def metzler_suite(count=50, seed=2024):
    rng = np.random.default_rng(seed)
    sizes = (2, 5, 10)
    out = []
    for k in range(count):
        n = sizes[k % 3]
        sp = MeasureSpace(rng.uniform(0.5, 2, n))
        gs, gt = random_metzler_pair(rng, n)
        f = LpElement(rng.uniform(0.5, 1.5, n), 2, sp, nonneg=True)
        g = LpElement(rng.uniform(0.5, 1.5, n), 2, sp, nonneg=True)
        out.append(EstimateInstance(Generator(gs, sp), Generator(gt, sp), f, g))
    return out


def test_1_equivalence_round_trip(acceptance):
    start = time.perf_counter()
    bad = []
    worst_res, worst_semi = np.inf, np.inf
    for k, inst in enumerate(metzler_suite()):
        mc = minimal_C(inst)
        inst = inst.with_C(mc.value)
        r = check_resolvent_condition(inst)
        s = check_semigroup_condition(inst, [0.1, 0.5, 1, 2], 256)
        worst_res = min(worst_res, r.worst_margin)
        worst_semi = min(worst_semi, s.worst_margin + s.tolerance + s.error_band)
        if r.worst_margin < -1e-9 or s.status == "fails":
            bad.append(k)
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed <= 30
    acceptance(1, ok, f"50 pairs, failures={bad}, worst resolvent margin={worst_res:.3g}, "
                      f"worst semigroup slack={worst_semi:.3g}, {elapsed:.1f}s")
    assert ok


def test_2_necessity(acceptance):
    misses = []
    for k, inst in enumerate(metzler_suite()):
        mc = minimal_C(inst)
        low = inst.with_C(0.9 * mc.value)
        gen = check_generator_condition(low)
        scan = small_time_scan(low, mc.site, kmax=20, quad_steps=256)
        if gen.holds or scan["first_failure_t"] is None:
            misses.append(k)
    ok = not misses
    acceptance(2, ok, f"50 instances at 0.9 C*, generator check and small-t scan misses={misses}")
    assert ok


def test_3_convolution_lemma(acceptance):
    one = constant_family(1.0)
    lin_err = 0.0
    for t in (0.5, 1.0, 3.0):
        for n in (2, 5, 17, 100, 1000):
            s = discrete_convolution_sum(linear_family(), one, t, n)
            lin_err = max(lin_err, abs((s - t / 2) - t / (2 * (n - 1))))

    sp = MeasureSpace([1.0, 1.0])
    gs = Generator([[-1, 1], [1, -1]], sp)
    gt = Generator([[-1, 1.5], [1.5, -1]], sp)
    ones = sp.ones()
    phi = resolvent_pairing_family(gt, sp.basis(0), ones, "forward")
    psi = resolvent_pairing_family(gs, sp.basis(1), ones, "adjoint")
    study = convergence_study(phi, psi, 1.0, [2**k for k in range(4, 13)])
    final = study.rows[-1]["abs_error"]

    rng = np.random.default_rng(3)
    pts = [(float(rng.uniform(0, 3)), int(rng.integers(1, 500)), int(rng.integers(1, 500))) for _ in range(1000)]
    defect = max(scaling_law_defect(phi, pts), scaling_law_defect(psi, pts))

    ok = lin_err <= 1e-12 and study.monotone and final <= 1e-3 and defect <= 1e-12
    acceptance(3, ok, f"linear closed-form err={lin_err:.2g}, monotone={study.monotone}, "
                      f"final err={final:.3g}, scaling defect={defect:.2g}")
    assert ok


def test_4_euler_first_order(acceptance):
    rng = np.random.default_rng(44)
    ratios = []
    for _ in range(5):
        sp = MeasureSpace(rng.uniform(0.5, 2, 5))
        G = Generator(random_metzler(rng, 5), sp)
        u = sp.element(rng.uniform(0, 1, 5))
        exact = semigroup_apply(G, 1.0, u).values
        errs = [np.linalg.norm(euler_formula(G, 1.0, n, u).values - exact) for n in 2 ** np.arange(6, 13)]
        ratios += [b / a for a, b in zip(errs, errs[1:])]
    ok = all(0.35 <= r <= 0.65 for r in ratios)
    acceptance(4, ok, f"5 generators, ratio range [{min(ratios):.4f}, {max(ratios):.4f}]")
    assert ok


def jump_suite(count=20, seed=55):
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        n = (5, 10, 20)[k % 3]
        sp = MeasureSpace(rng.uniform(0.5, 2, n))
        kind = ("path", "cycle", "random")[k % 3 if k < 3 else int(rng.integers(0, 3))]
        if kind == "path":
            edges = [[a, b, rng.uniform(0.5, 2)] for a, b, _ in path_edges(n)]
        elif kind == "cycle":
            edges = [[a, b, rng.uniform(0.5, 2)] for a, b, _ in cycle_edges(n)]
        else:
            edges = random_connected_edges(rng, n)
        out.append((kind, graph_laplacian_form(sp, edges), JumpKernel(random_jump_matrix(rng, n), sp)))
    return out


def spectral_rhs(setup, t, panels):
    """``int_0^t e^{omega(t-s)} S(s) f ds`` from the eigen-decomposition, Simpson on ``panels``."""
    mu, left, right = spectral_semigroup(setup.G_S)
    c = right @ setup.f.values
    s = np.linspace(0, t, panels + 1)
    vals = (left @ (np.exp(np.outer(mu, s)) * c[:, None])).T * np.exp(setup.omega * (t - s))[:, None]
    return scipy.integrate.simpson(vals, x=s, axis=0)


def test_5_jump_kernel_theorem(acceptance):
    start = time.perf_counter()
    failures, disagreements = [], []
    worst_gap = 0.0
    times = [0.1, 1.0]
    for k, (kind, tau0, j) in enumerate(jump_suite()):
        v = check_jump_kernel_theorem(tau0, j, times, quad_steps=256, C=1.0)
        if v.status != "holds":
            failures.append(k)
        setup = jump_setup(tau0, j)
        for t in times:
            ref = spectral_rhs(setup, t, 2**12)
            kT = extract_kernel(setup.G_T, t).values
            kS = extract_kernel(setup.G_S, t).values
            ref_margin = kS + ref[:, None] - kT
            rows = [r for r in v.details if r["t"] == t]
            got = np.array([r["margin"] for r in rows]).reshape(kT.shape[1], kT.shape[0]).T
            band = np.array([r["band"] for r in rows]).reshape(kT.shape[1], kT.shape[0]).T
            gap = np.abs(got - ref_margin)
            worst_gap = max(worst_gap, float(gap.max()))
            if np.any(gap > band + 1e-10) or ref_margin.min() < -1e-9:
                disagreements.append((k, t))
    elapsed = time.perf_counter() - start
    ok = not failures and not disagreements and elapsed <= 60
    acceptance(5, ok, f"20 instances, failures={failures}, oracle disagreements={disagreements}, "
                      f"max |256 vs 4096|={worst_gap:.2g}, {elapsed:.1f}s")
    assert ok


def form_suite(count=100, seed=66):
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        n = int(rng.integers(2, 8))
        sp = MeasureSpace(rng.uniform(0.5, 2, n))
        if k % 3 == 0:
            # arbitrary coefficients: positivity may fail either way
            form = BilinearForm(rng.normal(size=(n, n)) * (rng.random((n, n)) < 0.5), sp)
        else:
            lap = graph_laplacian_form(sp, random_connected_edges(rng, n))
            low = 0.0 if k % 3 == 1 else -0.3
            form = BilinearForm(lap.coeffs + np.diag(rng.uniform(low, 1.0, n) * sp.weights), sp)
        j = JumpKernel(random_jump_matrix(rng, n), sp)
        out.append((form, j))
    return out


def test_6_criteria_consistency(acceptance):
    mismatches, exceptions, inconsistent = 0, 0, 0
    passed = {"linf": 0, "l1": 0}
    for k, (form, j) in enumerate(form_suite()):
        if ouhabaz_positivity(form).holds != positivity_check(associated_generator(form)).is_metzler:
            mismatches += 1
        tau = perturbed_form(form, j)
        for name, crit in (("linf", ouhabaz_linf_contractive), ("l1", ouhabaz_l1_contractive)):
            a, b = crit(form, 200, k), crit(tau, 200, k)
            inconsistent += (not a.consistent) + (not b.consistent)
            if a.holds:
                passed[name] += 1
                exceptions += not b.holds
        if ouhabaz_positivity(form).holds and not ouhabaz_positivity(tau).holds:
            exceptions += 1
    ok = mismatches == 0 and exceptions == 0 and inconsistent == 0
    acceptance(6, ok, f"100 forms, positivity/Metzler mismatches={mismatches}, monotonicity exceptions="
                      f"{exceptions}, matrix/scan disagreements={inconsistent}, contractive bases={passed}")
    assert ok


def test_7_exact_identities(acceptance):
    rng = np.random.default_rng(77)
    adj, ck, stoch, holder = 0.0, 0.0, 0.0, 0.0
    for _ in range(20):
        n = int(rng.integers(2, 9))
        sp = MeasureSpace(rng.uniform(0.3, 3, n))
        G = Generator(random_metzler(rng, n), sp)
        Ga = weighted_adjoint(G)
        for i in range(n):
            for k in range(n):
                u, v = sp.basis(i), sp.basis(k)
                a = dual_pairing(u.with_values(G.matrix @ u.values), v)
                b = dual_pairing(u, v.with_values(Ga.matrix @ v.values))
                adj = max(adj, abs(a - b) / max(1.0, abs(a)))
        s, t = rng.uniform(0.05, 2, 2)
        lhs = extract_kernel(G, s).compose(extract_kernel(G, t)).values
        rhs = extract_kernel(G, s + t).values
        ck = max(ck, float(np.abs(lhs - rhs).max() / np.abs(rhs).max()))
        tau0 = graph_laplacian_form(sp, random_connected_edges(rng, n))
        GT = associated_generator(perturbed_form(tau0, JumpKernel(random_jump_matrix(rng, n), sp)))
        k_t = extract_kernel(GT, float(rng.uniform(0.1, 3))).values
        stoch = max(stoch, float(np.abs(k_t @ sp.weights - 1).max()))
        for p in (1.0, 2.0, 4.0, np.inf):
            f, g = sp.element(rng.normal(size=n)), sp.element(rng.normal(size=n))
            gap = abs(dual_pairing(f, g)) - lp_norm(f, p) * lp_norm(g, dual_exponent(p))
            holder = max(holder, gap)
    ok = adj <= 1e-12 and ck <= 1e-9 and stoch <= 1e-9 and holder <= 1e-12
    acceptance(7, ok, f"adjoint rel err={adj:.2g}, Chapman-Kolmogorov rel err={ck:.2g}, "
                      f"stochasticity err={stoch:.2g}, Hoelder max excess={holder:.2g}")
    assert ok


def test_8_determinism(acceptance, tmp_path):
    reports = []
    for run in ("a", "b"):
        blob = b""
        for path in bundled_scenarios():
            out = tmp_path / run / path.stem
            subprocess.run([sys.executable, "-m", "semipert", "verify", "--scenario", str(path),
                            "--out", str(out)], check=True, capture_output=True)
            blob += (out / "report.json").read_bytes()
        reports.append(blob)
    ok = reports[0] == reports[1] and len(reports[0]) > 0
    acceptance(8, ok, f"{len(bundled_scenarios())} bundled scenarios, byte-identical={reports[0] == reports[1]}")
    assert ok
