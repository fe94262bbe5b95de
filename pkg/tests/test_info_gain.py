import logging
import math

import numpy as np
import pytest

from conftest import BOX
from thermoinfo.errors import DIVERGENT, InvalidInput, NotNormalized, is_divergent
from thermoinfo.info_gain import (
    JointDistribution,
    ProbabilityKernel,
    conditional_entropy,
    ig_shift,
    information_gain,
    joint_from_density,
    joint_jacobian,
    kernel_information_gain,
    kl_divergence,
    log_base,
    mutual_information,
    relative_conditional_entropy,
    relative_shannon_entropy,
    shannon_entropy,
    to_base,
    variational_entropy_oracle,
)


def _h2(*p):
    return -sum(x * math.log2(x) for x in p if x > 0)


def test_appendix_entropies():
    assert shannon_entropy([0.25, 0.25, 0.25, 0.25], base=2) == pytest.approx(2.0, abs=1e-12)
    assert shannon_entropy([0.5, 0.25, 0.125, 0.125], base=2) == pytest.approx(1.75, abs=1e-12)
    assert shannon_entropy([2 / 3, 1 / 3], base=2) == pytest.approx(0.918, abs=5e-4)


def test_entropy_handles_zeros_and_bases():
    assert shannon_entropy([1.0, 0.0]) == 0.0
    assert shannon_entropy([0.5, 0.5], base="e") == pytest.approx(math.log(2))
    assert shannon_entropy([0.1] * 10, base="10") == pytest.approx(1.0, abs=1e-12)


def test_invalid_probability_vectors():
    with pytest.raises(InvalidInput):
        shannon_entropy([0.5, 0.6])
    with pytest.raises(InvalidInput):
        shannon_entropy([1.5, -0.5])
    with pytest.raises(InvalidInput):
        log_base("three")
    with pytest.raises(InvalidInput):
        log_base(1)


def test_divergent_values_pass_through_base_conversion():
    assert is_divergent(to_base(DIVERGENT, 2))
    assert to_base(math.log(8), 2) == pytest.approx(3.0)


def test_jacobian_of_product_is_the_first_marginal():
    P, Q = np.array([0.2, 0.3, 0.5]), np.array([0.6, 0.4])
    jac = joint_jacobian(JointDistribution(np.outer(P, Q)))
    np.testing.assert_allclose(jac.table, np.column_stack([P, P]), atol=1e-15)
    assert jac.defined.all()


def test_jacobian_examples():
    np.testing.assert_allclose(joint_jacobian(JointDistribution(np.diag([0.5, 0.5]))).table, np.eye(2))
    box = joint_jacobian(JointDistribution(BOX))
    np.testing.assert_allclose(box.table[:, 0], [10 / 55, 45 / 55], atol=1e-15)
    np.testing.assert_allclose(box.table[:, 1], [20 / 45, 25 / 45], atol=1e-15)


def test_jacobian_columns_without_mass_are_flagged():
    jac = joint_jacobian(JointDistribution([[0.5, 0.0], [0.5, 0.0]]))
    assert jac.defined.tolist() == [True, False]
    np.testing.assert_allclose(jac.table[:, 1], [0.5, 0.5])


def test_conditional_entropy_examples():
    P, Q = np.array([0.2, 0.3, 0.5]), np.array([0.6, 0.4])
    assert conditional_entropy(JointDistribution(np.outer(P, Q))) == pytest.approx(shannon_entropy(P), abs=1e-14)
    assert conditional_entropy(JointDistribution(np.diag([0.5, 0.5]))) == 0.0
    box = 0.55 * _h2(10 / 55, 45 / 55) + 0.45 * _h2(20 / 45, 25 / 45)
    assert conditional_entropy(JointDistribution(BOX), base=2) == pytest.approx(box, abs=1e-12)
    assert box == pytest.approx(0.8222, abs=1e-4)


def test_information_gain_examples():
    assert information_gain(JointDistribution(np.outer([0.2, 0.8], [0.5, 0.5]))) == pytest.approx(0.0, abs=1e-15)
    assert information_gain(JointDistribution(np.diag([0.5, 0.5])), base=2) == pytest.approx(1.0, abs=1e-15)


def test_box_example_routes_agree_with_direct_evaluation():
    pi = JointDistribution(BOX)
    gain = information_gain(pi)
    assert gain == pytest.approx(mutual_information(pi), abs=1e-12)

    # independent evaluation straight from the table
    t = np.array(BOX)
    P, Q = t.sum(axis=1), t.sum(axis=0)
    direct = sum(t[x, y] * math.log(t[x, y] / (P[x] * Q[y])) for x in range(2) for y in range(2))
    assert gain == pytest.approx(direct, abs=1e-12)
    assert information_gain(pi, base=2) == pytest.approx(_h2(0.3, 0.7) - 0.8222, abs=1e-4)


def test_information_gain_is_bounded(rng, make_joint):
    for _ in range(20):
        pi = make_joint(rng, 3, 4, zeros=2)
        gain = information_gain(pi)
        assert -1e-12 <= gain <= shannon_entropy(pi.P) + 1e-12


def test_information_gain_routes_agree_on_random_joints(make_joint):
    rng = np.random.default_rng(31)
    for _ in range(1000):
        r, c = rng.integers(2, 7, size=2)
        pi = make_joint(rng, r, c, zeros=int(rng.integers(0, 3)))
        difference = shannon_entropy(pi.P) - conditional_entropy(pi)
        assert difference == pytest.approx(mutual_information(pi), abs=1e-12)


def test_route_disagreement_is_logged_not_raised(monkeypatch, caplog):
    pi = JointDistribution(BOX)
    expected = shannon_entropy(pi.P) - conditional_entropy(pi)
    with caplog.at_level(logging.WARNING, logger="thermoinfo.info_gain"):
        assert information_gain(pi) == pytest.approx(expected, abs=1e-15)
    assert not caplog.records

    monkeypatch.setattr("thermoinfo.info_gain.mutual_information", lambda joint: expected + 0.1)
    with caplog.at_level(logging.WARNING, logger="thermoinfo.info_gain"):
        assert information_gain(pi) == pytest.approx(expected, abs=1e-15)
    assert [record.levelname for record in caplog.records] == ["WARNING"]
    assert "disagree" in caplog.records[0].getMessage()


@pytest.mark.parametrize("base", [2, 10])
def test_base_conversion_is_coherent(rng, make_joint, base):
    scale = math.log(base)
    for _ in range(20):
        pi = make_joint(rng, 3, 4, zeros=1)
        a, b = rng.dirichlet(np.ones(5)), rng.dirichlet(np.ones(5))
        assert information_gain(pi, base=base) == pytest.approx(information_gain(pi) / scale, abs=1e-12)
        assert conditional_entropy(pi, base) == pytest.approx(conditional_entropy(pi) / scale, abs=1e-12)
        assert shannon_entropy(a, base) == pytest.approx(shannon_entropy(a) / scale, abs=1e-12)
        assert kl_divergence(a, b, base) == pytest.approx(kl_divergence(a, b) / scale, abs=1e-12)


def test_gibbs_inequality():
    rng = np.random.default_rng(37)
    for _ in range(200):
        d = int(rng.integers(2, 7))
        a, b = rng.dirichlet(np.ones(d)), rng.dirichlet(np.ones(d))
        assert np.dot(a, np.log(a)) >= np.dot(a, np.log(b)) - 1e-12
        assert kl_divergence(a, b) >= -1e-12
        assert kl_divergence(a, a) == pytest.approx(0.0, abs=1e-12)
        if not np.allclose(a, b):
            assert kl_divergence(a, b) > 0


def test_kl_divergence_examples():
    assert kl_divergence([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert is_divergent(kl_divergence([1.0, 0.0], [0.0, 1.0]))
    expected = 0.75 * math.log(1.5) + 0.25 * math.log(0.5)
    assert kl_divergence([0.75, 0.25], [0.5, 0.5]) == pytest.approx(expected, abs=1e-15)


def test_kl_divergence_shape_mismatch():
    with pytest.raises(InvalidInput):
        kl_divergence([0.5, 0.5], [0.2, 0.3, 0.5])


def test_relative_entropies_carry_the_log_d_shift(rng, make_joint):
    pi = make_joint(rng, 3, 2)
    counting, uniform = np.ones(3), np.full(3, 1 / 3)
    assert relative_shannon_entropy(pi.P, counting) == pytest.approx(shannon_entropy(pi.P), abs=1e-14)
    assert relative_shannon_entropy(pi.P, uniform) == pytest.approx(shannon_entropy(pi.P) - math.log(3), abs=1e-14)
    assert relative_conditional_entropy(pi, counting) == pytest.approx(conditional_entropy(pi), abs=1e-14)
    assert relative_conditional_entropy(pi, uniform) == pytest.approx(conditional_entropy(pi) - math.log(3), abs=1e-14)
    # the shift cancels in the gain
    gain = relative_shannon_entropy(pi.P, uniform) - relative_conditional_entropy(pi, uniform)
    assert gain == pytest.approx(information_gain(pi), abs=1e-13)


def test_kernel_gain_of_own_disintegration_is_zero(rng, make_joint):
    pi = make_joint(rng, 3, 4)
    kernel = ProbabilityKernel(joint_jacobian(pi).table.T)
    assert kernel_information_gain(pi, kernel) == pytest.approx(0.0, abs=1e-14)


def test_constant_kernel_gives_information_gain(rng, make_joint):
    pi = make_joint(rng, 3, 4)
    kernel = ProbabilityKernel.constant(pi.P, 4)
    assert kernel_information_gain(pi, kernel) == pytest.approx(information_gain(pi), abs=1e-13)


def test_kernel_gain_singular_cases():
    pi = JointDistribution([[0.5, 0.0], [0.0, 0.5]])
    # a zero of pi under a charged kernel entry contributes nothing
    assert kernel_information_gain(pi, ProbabilityKernel([[0.5, 0.5], [0.5, 0.5]])) == pytest.approx(math.log(2))
    # pi charges (1, 1) where the kernel vanishes
    assert is_divergent(kernel_information_gain(pi, ProbabilityKernel([[1.0, 0.0], [1.0, 0.0]])))


def test_kernel_shape_is_checked(rng, make_joint):
    pi = make_joint(rng, 3, 2)
    with pytest.raises(InvalidInput):
        kernel_information_gain(pi, ProbabilityKernel(np.full((3, 2), 0.5)))


def test_ig_shift_with_zero_tilt_matches_constant_kernel(rng, make_joint):
    pi = make_joint(rng, 3, 4)
    nu = np.array([0.2, 0.5, 0.3])
    expected = kernel_information_gain(pi, ProbabilityKernel.constant(nu, 4))
    assert ig_shift(pi, nu, np.zeros((3, 4))) == pytest.approx(expected, abs=1e-14)


def test_ig_shift_with_own_disintegration_is_zero(rng, make_joint):
    pi = make_joint(rng, 3, 4)
    jac = joint_jacobian(pi).table
    phi0 = np.log(jac / pi.P[:, None])
    assert ig_shift(pi, pi.P, phi0) == pytest.approx(0.0, abs=1e-13)
    tilted = ProbabilityKernel.tilted(pi.P, phi0)
    assert kernel_information_gain(pi, tilted) == pytest.approx(0.0, abs=1e-13)


def test_ig_shift_rejects_ragged_tilts(rng, make_joint):
    pi = make_joint(rng, 2, 2)
    with pytest.raises(InvalidInput):
        ig_shift(pi, [0.5, 0.5], [[0.0, 0.0], [0.0]])


def test_ig_shift_rejects_unnormalized_tilts(rng, make_joint):
    pi = make_joint(rng, 3, 2)
    with pytest.raises(NotNormalized):
        ig_shift(pi, [0.2, 0.5, 0.3], np.full((3, 2), 0.1))


def test_two_disintegrations_of_a_degenerate_reference_disagree():
    # pi0 = nu x delta_0 has the kernels nu (phi0 = 0) and, on the unused fiber y = 1,
    # exp(f) nu (psi0 = y f(x)); both describe pi0 exactly
    nu = np.array([0.5, 0.3, 0.2])
    r = np.array([0.2, 0.3, 0.5])
    f = np.log(r / nu)
    phi0 = np.zeros((3, 2))
    psi0 = np.column_stack([np.zeros(3), f])

    reference = np.column_stack([nu, np.zeros(3)])
    np.testing.assert_allclose(joint_from_density(nu, phi0, [1.0, 0.0]).table, reference)
    np.testing.assert_allclose(joint_from_density(nu, psi0, [1.0, 0.0]).table, reference)

    pi = JointDistribution(np.column_stack([np.zeros(3), nu]))
    first, second = ig_shift(pi, nu, phi0), ig_shift(pi, nu, psi0)
    assert second - first == pytest.approx(-np.dot(f, nu), abs=1e-14)
    assert abs(second - first) > 0.1

    # the kernel form pins the answer once the kernel is named
    assert kernel_information_gain(pi, ProbabilityKernel.tilted(nu, psi0)) == pytest.approx(second, abs=1e-14)
    assert kernel_information_gain(pi, ProbabilityKernel.tilted(nu, phi0)) == pytest.approx(first, abs=1e-14)


def test_variational_oracle_on_product():
    P, Q = np.array([0.2, 0.3, 0.5]), np.array([0.6, 0.4])
    value = variational_entropy_oracle(JointDistribution(np.outer(P, Q)))
    assert value == pytest.approx(-shannon_entropy(P), abs=1e-6)


def test_variational_oracle_on_box():
    pi = JointDistribution(BOX)
    assert variational_entropy_oracle(pi) == pytest.approx(-conditional_entropy(pi), abs=1e-6)


def test_variational_oracle_on_random_joints(make_joint):
    rng = np.random.default_rng(99)
    for trial in range(20):
        pi = make_joint(rng, 4, 4, zeros=3 if trial < 2 else 0)
        assert variational_entropy_oracle(pi) == pytest.approx(-conditional_entropy(pi), abs=1e-6)


def test_variational_oracle_rejects_zero_iterations():
    with pytest.raises(InvalidInput):
        variational_entropy_oracle(JointDistribution(BOX), iters=0)
