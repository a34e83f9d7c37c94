import math

import numpy as np
import pytest
import scipy.integrate
import scipy.linalg

from semipert import (
    BilinearForm,
    Generator,
    JumpKernel,
    LpElement,
    MeasureSpace,
    PreconditionError,
    associated_generator,
    graph_laplacian_form,
    perturbed_form,
    semigroup_apply,
)
from semipert.errors import InvalidTimeError
from semipert.kernels import (
    check_jump_kernel_theorem,
    check_kernel_estimate,
    extract_kernel,
    jump_bound_terms,
    jump_setup,
)

from conftest import random_metzler

G2 = [[-1, 1], [1, -1]]


def path5():
    sp = MeasureSpace.uniform(5)
    tau0 = graph_laplacian_form(sp, [[i, i + 1, 1.0] for i in range(4)])
    j = np.zeros((5, 5))
    j[0, 4] = 1.0
    return tau0, JumpKernel(j, sp)


def jump_oracle(tau0, j, t):
    """Right-hand side by adaptive quadrature on scipy's expm, independent of Simpson."""
    setup = jump_setup(tau0, j)
    gs, f, w = setup.G_S.matrix, setup.f.values, setup.omega
    integ, _ = scipy.integrate.quad_vec(lambda s: math.exp(w * (t - s)) * scipy.linalg.expm(s * gs) @ f,
                                        0, t, epsabs=1e-13, epsrel=1e-12)
    m = tau0.space.weights
    kT = scipy.linalg.expm(t * setup.G_T.matrix) / m[None, :]
    kS = scipy.linalg.expm(t * gs) / m[None, :]
    return kS + integ[:, None] - kT


def test_extract_kernel_examples():
    k = extract_kernel(Generator(np.zeros((2, 2)), MeasureSpace([2, 3])), 1.0).values
    np.testing.assert_allclose(k, np.diag([1 / 2, 1 / 3]))
    e = math.exp(-1)
    k = extract_kernel(Generator(G2, MeasureSpace([1, 1])), 0.5).values
    np.testing.assert_allclose(k, [[(1 + e) / 2, (1 - e) / 2], [(1 - e) / 2, (1 + e) / 2]], rtol=1e-14)
    with pytest.raises(InvalidTimeError):
        extract_kernel(Generator(G2, MeasureSpace([1, 1])), 0.0)


def test_kernel_reproduces_semigroup():
    rng = np.random.default_rng(1)
    for n in (2, 5, 9):
        sp = MeasureSpace(rng.uniform(0.5, 2, n))
        G = Generator(random_metzler(rng, n), sp)
        hk = extract_kernel(G, 0.8)
        assert hk.values.min() >= -1e-12 * np.abs(hk.values).max()
        for i in range(n):
            u = sp.basis(i)
            want = semigroup_apply(G, 0.8, u).values
            np.testing.assert_allclose(hk.apply(u), want, rtol=1e-10, atol=1e-15)


def test_chapman_kolmogorov():
    rng = np.random.default_rng(2)
    sp = MeasureSpace(rng.uniform(0.5, 2, 6))
    G = Generator(random_metzler(rng, 6), sp)
    a, b = extract_kernel(G, 0.3), extract_kernel(G, 1.1)
    np.testing.assert_allclose(a.compose(b).values, extract_kernel(G, 1.4).values, rtol=1e-9)


def test_symmetric_kernel_uniform_weights():
    tau0, j = path5()
    k = extract_kernel(associated_generator(perturbed_form(tau0, j)), 0.9).values
    np.testing.assert_allclose(k, k.T, atol=1e-10)


def test_stochastic_conservative():
    rng = np.random.default_rng(3)
    sp = MeasureSpace(rng.uniform(0.5, 2, 6))
    tau0 = graph_laplacian_form(sp, [[i, (i + 1) % 6, rng.uniform(0.5, 2)] for i in range(6)])
    G = associated_generator(perturbed_form(tau0, JumpKernel(rng.uniform(0, 1, (6, 6)), sp)))
    k = extract_kernel(G, 1.3).values
    np.testing.assert_allclose(k @ sp.weights, 1, atol=1e-9)


def test_kernel_estimate_examples(inst2):
    same = check_kernel_estimate(inst2.G_S, inst2.G_S, inst2.f, inst2.gprime, 0.0, 0.5)
    assert same.holds and same.worst_margin == 0
    v = check_kernel_estimate(inst2.G_S, inst2.G_T, inst2.f, inst2.gprime, 0.5, 0.5)
    assert v.holds and len(v.details) == 4
    v = check_kernel_estimate(inst2.G_S, inst2.G_T, inst2.f, inst2.gprime, 0.25, 0.01)
    assert v.status == "fails"
    assert {"x": v.worst_site["x"], "y": v.worst_site["y"]} in ({"x": 1, "y": 0}, {"x": 0, "y": 1})


def test_kernel_estimate_matches_pairing_margins():
    from semipert.estimates import EstimateInstance, exact_semigroup_margins

    rng = np.random.default_rng(4)
    n = 3
    sp = MeasureSpace(rng.uniform(0.5, 2, n))
    gs = random_metzler(rng, n)
    gt = gs + rng.uniform(0, 1, (n, n)) * ~np.eye(n, dtype=bool)
    f = LpElement(rng.uniform(0.5, 1.5, n), 2, sp)
    g = LpElement(rng.uniform(0.5, 1.5, n), 2, sp)
    inst = EstimateInstance(Generator(gs, sp), Generator(gt, sp), f, g, 0.8)
    v = check_kernel_estimate(inst.G_S, inst.G_T, f, g, 0.8, 0.6, 128)
    kern = np.array([[r["margin"] for r in v.details if r["x"] == x] for x in range(n)])
    pair = exact_semigroup_margins(inst, 0.6, 128)
    # kernel margins are pairing margins divided by m_x m_y
    m = sp.weights
    np.testing.assert_allclose(kern, pair / np.outer(m, m), rtol=1e-9, atol=1e-13)


def test_jump_theorem_path5():
    tau0, j = path5()
    v = check_jump_kernel_theorem(tau0, j, [0.1, 1.0])
    assert v.holds and v.worst_margin > 0
    assert v.info["omega"] == pytest.approx(0, abs=1e-14)
    for t in (0.1, 1.0):
        want = jump_oracle(tau0, j, t)
        got = np.array([[r["margin"] for r in v.details if r["t"] == t and r["x"] == x] for x in range(5)])
        np.testing.assert_allclose(got, want, atol=1e-11)


def test_jump_theorem_zero_jump():
    tau0, j = path5()
    v = check_jump_kernel_theorem(tau0, j.scaled(0.0), [0.5])
    assert v.holds and v.worst_margin == 0


def _random10():
    rng = np.random.default_rng(10)
    n = 10
    sp = MeasureSpace(rng.uniform(0.5, 2, n))
    tau0 = graph_laplacian_form(sp, [[i, i + 1, rng.uniform(0.5, 2)] for i in range(n - 1)])
    return tau0, JumpKernel(rng.uniform(0, 1, (n, n)) * (rng.random((n, n)) < 0.3), sp)


def test_jump_theorem_scaled_profile_margins_grow():
    # f_j scales linearly with j while k^T - k^S grows sublinearly
    tau0, j = _random10()
    margins = []
    for scale in (0.5, 1.0, 2.0):
        v = check_jump_kernel_theorem(tau0, j.scaled(scale), [1.0])
        assert v.holds
        assert v.info["per_t"][0]["empirical_C"] <= 1.0
        margins.append(v.worst_margin)
    assert margins[0] < margins[1] < margins[2]


def test_jump_bound_fixed_profile_margins_shrink():
    from semipert import jump_profiles
    from semipert.estimates import EstimateInstance, check_strong_condition

    tau0, j = _random10()
    f = jump_profiles(j).f_j
    margins = []
    for scale in (0.5, 1.0, 2.0):
        gt = associated_generator(perturbed_form(tau0, j.scaled(scale)))
        inst = EstimateInstance(associated_generator(tau0), gt, f, None, 1.0, p=1, q=1, mode="strong")
        margins.append(check_strong_condition(inst, [1.0]).worst_margin)
    assert margins[0] > margins[1] > margins[2]


def test_jump_theorem_precondition():
    sp = MeasureSpace.uniform(2)
    bad = BilinearForm([[1, 1], [1, 1]], sp)
    with pytest.raises(PreconditionError) as exc:
        check_jump_kernel_theorem(bad, JumpKernel(np.zeros((2, 2)), sp), [1.0])
    assert exc.value.criterion == "positivity"
    grow = BilinearForm([[-1, -1], [-1, -1]], sp)
    with pytest.raises(PreconditionError) as exc:
        check_jump_kernel_theorem(grow, JumpKernel(np.zeros((2, 2)), sp), [1.0])
    assert exc.value.criterion == "contractivity"


def test_bound_terms_band_small():
    tau0, j = path5()
    _, _, integ, err = jump_bound_terms(jump_setup(tau0, j), 1.0, 256)
    assert np.all(integ > 0) and err.max() < 1e-10
