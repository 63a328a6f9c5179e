"""Tests for the closed-form counting statistics."""

import numpy as np
import pytest

from gausscount.counting import (
    NumberPGF,
    _pgf_value,
    infinite_divisibility_check,
    joint_pgf,
    mean_N,
    pmf,
    prob_zero,
    pure_factorization,
    spectral_data,
    total_pgf,
    var_N,
)
from gausscount.errors import SpectralPairingError
from gausscount.states import (
    Displacement,
    coherent,
    displace,
    new_state,
    random_state,
    thermal,
    vacuum,
)
from gausscount.tomography import displacement_mean_shift


def disp(x, y):
    return Displacement(np.atleast_1d(x), np.atleast_1d(y))


def squeezed_vacuum(c):
    """One-mode pure state with covariance diag(c/2, 1/(2c))."""
    return new_state([0.0], [0.0], np.diag([0.5 * c, 0.5 / c]))


def test_spectral_data_vacuum():
    data = spectral_data(vacuum(2))
    np.testing.assert_allclose(data.lambdas, 0.5 * np.ones(4), atol=1e-15)
    np.testing.assert_allclose(data.alphas, np.zeros(4), atol=1e-15)
    np.testing.assert_allclose(data.taus, np.zeros(4), atol=1e-15)


def test_spectral_data_thermal():
    t = 0.9
    data = spectral_data(thermal([t]))
    lam = 0.5 / np.tanh(0.5 * t)
    np.testing.assert_allclose(data.lambdas, [lam, lam], atol=1e-13)
    np.testing.assert_allclose(data.alphas, [np.exp(-t)] * 2, atol=1e-13)


def test_spectral_data_coherent():
    u = disp(0.6, -0.3)
    data = spectral_data(coherent(u))
    np.testing.assert_allclose(data.alphas, np.zeros(2), atol=1e-15)
    assert np.sum(data.taus**2) == pytest.approx(2 * (0.6**2 + 0.3**2), rel=1e-12)


def test_spectral_invariants_on_random_states():
    rng = np.random.default_rng(1)
    for _ in range(25):
        rho = random_state(2, rng)
        data = spectral_data(rho)
        assert np.all(np.abs(data.alphas) < 1.0)
        assert np.sum(data.taus**2) == pytest.approx(
            float(rho.mean_vector() @ rho.mean_vector()), abs=1e-10
        )


def test_total_pgf_vacuum_is_one():
    for x in (0.0, 0.3, 0.99, 1.0):
        assert total_pgf(vacuum(3), x) == pytest.approx(1.0, abs=1e-13)


def test_total_pgf_thermal_is_geometric():
    t = 0.7
    alpha = np.exp(-t)
    rho = thermal([t])
    for x in (0.0, 0.25, 0.8):
        assert total_pgf(rho, x) == pytest.approx((1 - alpha) / (1 - alpha * x), rel=1e-12)


def test_total_pgf_squeezed_vacuum():
    c = 3.0
    beta = (c - 1) / (c + 1)
    rho = squeezed_vacuum(c)
    for x in (0.0, 0.5, 0.9):
        expected = np.sqrt((1 - beta**2) / (1 - beta**2 * x**2))
        assert total_pgf(rho, x) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("x", [-0.1, 1.1])
def test_total_pgf_domain(x):
    with pytest.raises(ValueError):
        total_pgf(vacuum(1), x)


def test_total_pgf_monotone_and_normalised():
    rng = np.random.default_rng(2)
    rho = random_state(2, rng)
    grid = np.linspace(0.0, 0.999, 40)
    values = [total_pgf(rho, float(x)) for x in grid]
    assert np.all(np.diff(values) >= -1e-12)
    assert abs(total_pgf(rho, 1.0 - 1e-6) - 1.0) < 1e-4


def test_joint_pgf_reduces_to_total():
    rng = np.random.default_rng(3)
    for _ in range(10):
        rho = random_state(2, rng)
        x = float(rng.uniform(0.1, 0.9))
        assert joint_pgf(rho, [x, x]) == pytest.approx(total_pgf(rho, x), abs=1e-10)


def test_joint_pgf_factorises_over_product_states():
    t1, t2 = 0.6, 1.1
    pair = thermal([t1, t2])
    for xs in ([0.2, 0.7], [0.5, 0.5]):
        marg = total_pgf(thermal([t1]), xs[0]) * total_pgf(thermal([t2]), xs[1])
        assert joint_pgf(pair, xs) == pytest.approx(marg, rel=1e-12)


def test_joint_pgf_vacuum():
    assert joint_pgf(vacuum(2), [0.3, 0.8]) == pytest.approx(1.0, abs=1e-13)


def test_prob_zero_examples():
    assert prob_zero(vacuum(2)) == pytest.approx(1.0, abs=1e-14)
    u = disp(0.7, 0.4)
    assert prob_zero(coherent(u)) == pytest.approx(np.exp(-(0.7**2 + 0.4**2)), rel=1e-12)
    rho = random_state(2, np.random.default_rng(4))
    assert prob_zero(rho) == pytest.approx(total_pgf(rho, 0.0), abs=1e-14)


def test_mean_examples():
    assert mean_N(vacuum(2)) == 0.0
    u = disp(0.8, -0.5)
    assert mean_N(coherent(u)) == pytest.approx(0.8**2 + 0.5**2, rel=1e-13)
    t = 1.2
    assert mean_N(thermal([t])) == pytest.approx(1 / (np.exp(t) - 1), rel=1e-12)


def test_var_examples():
    assert var_N(vacuum(1)) == 0.0
    u = disp(0.8, -0.5)
    assert var_N(coherent(u)) == pytest.approx(0.8**2 + 0.5**2, rel=1e-12)
    t = 0.9
    q = np.exp(-t)
    assert var_N(thermal([t])) == pytest.approx(q / (1 - q) ** 2, rel=1e-12)


def test_super_poissonian_identity_zero_mean():
    rng = np.random.default_rng(5)
    for _ in range(30):
        rho = random_state(2, rng, mean_scale=0.0)
        excess = var_N(rho) - mean_N(rho)
        expected = 0.5 * np.trace((rho.S - 0.5 * np.eye(4)) @ (rho.S - 0.5 * np.eye(4)))
        assert excess == pytest.approx(expected, abs=1e-10)
        assert excess >= -1e-12


def test_moments_match_pgf_derivatives():
    rng = np.random.default_rng(6)
    h = 1e-5
    for _ in range(10):
        rho = random_state(2, rng)
        x0 = 1.0 - h
        logs = [np.log(total_pgf(rho, x)) for x in (x0 - h, x0, 1.0)]
        d1 = (logs[2] - logs[0]) / (2 * h)
        d2 = (logs[2] - 2 * logs[1] + logs[0]) / h**2
        mean = mean_N(rho)
        var = var_N(rho)
        assert abs(d1 - mean) <= 1e-3 * (1 + mean)
        assert abs(d2 + d1 - var) <= 1e-3 * (1 + var)


def test_displacement_mean_increase_identity():
    rng = np.random.default_rng(7)
    for _ in range(20):
        rho = random_state(2, rng)
        u = disp(rng.normal(size=2), rng.normal(size=2))
        increase = mean_N(displace(rho, u)) - mean_N(rho)
        assert increase == pytest.approx(displacement_mean_shift(rho, u), abs=1e-11)


def test_pure_factorization_vacuum():
    fac = pure_factorization(vacuum(2))
    assert fac.k == 0
    assert fac.poisson_mean == pytest.approx(0.0, abs=1e-15)


def test_pure_factorization_squeezed_vacuum():
    fac = pure_factorization(squeezed_vacuum(4.0))
    assert fac.k == 1
    np.testing.assert_allclose(fac.cs, [4.0], atol=1e-10)
    np.testing.assert_allclose(fac.betas, [0.6], atol=1e-12)
    np.testing.assert_allclose(fac.gammas, [0.0], atol=1e-15)
    np.testing.assert_allclose(fac.deltas, [0.0], atol=1e-15)
    for x in (0.3, 0.8):
        assert fac.g2(x) == pytest.approx(1.0, abs=1e-14)
        assert fac.g3(x) == pytest.approx(1.0, abs=1e-14)


def test_pure_factorization_displaced_squeezed():
    rho = displace(squeezed_vacuum(4.0), disp(0.5, -0.3))
    fac = pure_factorization(rho)
    data = spectral_data(rho)
    # residual directions carry the Poisson factor with mean sum(tau^2)/2
    expected = 0.5 * sum(
        data.taus[j] ** 2 for j in range(2) if abs(data.lambdas[j] - 0.5) < 1e-9
    )
    assert fac.poisson_mean == pytest.approx(expected, abs=1e-12)


def test_pure_factorization_product_matches_pgf():
    rng = np.random.default_rng(8)
    for n in (1, 2):
        for _ in range(5):
            rho = random_state(n, rng, pure=True)
            fac = pure_factorization(rho)
            for x in np.arange(0.1, 1.0, 0.1):
                product = fac.g1(x) * fac.g2(x) * fac.g3(x)
                assert product == pytest.approx(total_pgf(rho, float(x)), abs=1e-9)


def test_pure_factorization_rejects_mixed_states():
    with pytest.raises(ValueError):
        pure_factorization(thermal([0.8]))


def test_pure_factorization_rejects_unpairable_spectrum():
    # det(2S) = 1 but the eigenvalue 2 has no 1/8 partner; force the bogus
    # spectrum through the non-validating constructor
    tail = (1.0 / 32.0) / (0.6 * 0.35)
    bad = new_state(
        [0.0, 0.0], [0.0, 0.0], np.diag([2.0, 0.6, 0.35, tail]), require_valid=False
    )
    with pytest.raises(SpectralPairingError):
        pure_factorization(bad)


def test_pmf_vacuum():
    np.testing.assert_allclose(pmf(vacuum(1), 3), [1.0, 0.0, 0.0, 0.0], atol=1e-12)


def test_pmf_coherent_is_poisson():
    import math

    rho = coherent(disp(1.0, 0.0))
    probs = pmf(rho, 25)
    expected = np.exp(-1.0) / np.array([math.factorial(k) for k in range(26)], dtype=float)
    np.testing.assert_allclose(probs, expected, atol=1e-8)


def test_pmf_squeezed_vacuum_has_even_support():
    probs = pmf(squeezed_vacuum(np.exp(2 * 0.8)), 40)
    assert np.max(probs[1::2]) <= 1e-9


def test_pmf_mass_and_mean():
    # moderate spectrum (thermal ratio 0.45 plus a mild squeeze), where
    # kmax = 10(1+mean) leaves a k-weighted tail well under the bound
    rho = displace(
        new_state([0.0], [0.0], np.diag([1.1, 0.65])), disp(0.4, -0.3)
    )
    mean = mean_N(rho)
    kmax = int(10 * (1 + mean))
    probs = pmf(rho, kmax)
    assert probs.sum() >= 1 - 1e-6
    assert probs.sum() <= 1 + 1e-9
    assert probs @ np.arange(kmax + 1) == pytest.approx(mean, abs=1e-4 * (1 + mean))


def test_pmf_rejects_negative_kmax():
    with pytest.raises(ValueError):
        pmf(vacuum(1), -1)


def test_pmf_deep_extraction_stays_accurate():
    # the sampling radius grows toward 1 for large kmax, keeping the
    # 1/r^k unfolding from amplifying roundoff at k ~ 200
    import math

    u = disp(np.sqrt(5.0), 0.0)
    probs = pmf(coherent(u), 200)
    ks = np.arange(201)
    ref = np.exp(-5.0 + ks * np.log(5.0) - np.array([math.lgamma(k + 1) for k in ks]))
    np.testing.assert_allclose(probs, ref, atol=1e-10)

    rho = squeezed_vacuum(np.exp(2.0))
    probs = pmf(rho, 200)
    beta = (np.exp(2.0) - 1) / (np.exp(2.0) + 1)
    ref = np.zeros(201)
    for m in range(101):
        logc = math.lgamma(2 * m + 1) - 2 * math.lgamma(m + 1)
        ref[2 * m] = math.exp(logc + 2 * m * math.log(beta / 2.0) + 0.5 * math.log(1 - beta**2))
    np.testing.assert_allclose(probs, ref, atol=1e-10)
    assert probs[1::2].max() <= 1e-9


def test_degenerate_eigenbasis_is_irrelevant():
    # coherent states have a fully degenerate spectrum: any orthonormal
    # basis of the eigenspace must give the same pgf
    rng = np.random.default_rng(10)
    rho = coherent(disp([0.4, -0.2], [0.3, 0.6]))
    data = spectral_data(rho)
    size = data.lambdas.size
    raw = rng.normal(size=(size, size))
    q, _ = np.linalg.qr(raw)
    rotated = NumberPGF(lambdas=data.lambdas, taus=q.T @ rho.mean_vector(), alphas=data.alphas)
    for x in (0.2, 0.7):
        assert np.real(_pgf_value(rotated, x)) == pytest.approx(
            total_pgf(rho, x), abs=1e-10
        )


def test_divisibility_coherent_is_poisson():
    u = disp(0.9, -0.4)
    report = infinite_divisibility_check(coherent(u), 12)
    assert report.divisible_up_to_order
    assert report.levy_coeffs[0] == pytest.approx(0.9**2 + 0.4**2, rel=1e-12)
    assert np.max(np.abs(report.levy_coeffs[1:])) <= 1e-10


def test_divisibility_zero_mean_nonnegative_alphas():
    report = infinite_divisibility_check(thermal([0.5, 1.0]), 30)
    assert report.divisible_up_to_order
    assert np.all(report.levy_coeffs >= 0)


def test_divisibility_pure_state_gamma_dominated():
    rho = displace(squeezed_vacuum(3.0), disp(0.0, 0.7))  # mean along the wide axis
    fac = pure_factorization(rho)
    assert np.all(fac.gammas >= fac.deltas)
    assert infinite_divisibility_check(rho, 30).divisible_up_to_order


def test_divisibility_checker_flags_negative_coefficients():
    # squeezed vacuum displaced along the squeezed axis: the second
    # coefficient beta^2/2 - tau^2 beta (1+beta)^2 / 2 turns negative,
    # so the finite-order check must say "not divisible up to here"
    beta = 0.6  # c = 4
    rho = displace(squeezed_vacuum(4.0), disp(1.0 / np.sqrt(2.0), 0.0))
    report = infinite_divisibility_check(rho, 6)
    assert not report.divisible_up_to_order
    expected = 0.5 * beta**2 - 0.5 * beta * (1 + beta) ** 2
    assert report.levy_coeffs[1] == pytest.approx(expected, rel=1e-12)


def test_divisibility_rejects_bad_order():
    with pytest.raises(ValueError):
        infinite_divisibility_check(vacuum(1), 0)


def test_levy_coeffs_match_log_pgf_series():
    # a polynomial fit of log G near 0 recovers the same coefficients
    rho = random_state(1, np.random.default_rng(11))
    report = infinite_divisibility_check(rho, 5)
    grid = np.linspace(0.0, 8e-3, 9)
    logs = np.log([total_pgf(rho, float(x)) for x in grid])
    coeffs = np.polyfit(grid, logs, 5)[::-1]
    for k in (1, 2, 3):
        assert coeffs[k] == pytest.approx(report.levy_coeffs[k - 1], rel=5e-3, abs=1e-6)
