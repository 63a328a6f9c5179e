"""Tests for the truncated-basis oracle and its gate calibration contract."""

import numpy as np
import pytest

from gausscount import counting
from gausscount.errors import TruncationRiskError
from gausscount.fock import (
    FockState,
    apply_unitary,
    beamsplitter_operator,
    beamsplitter_symplectic,
    embed_one_mode,
    fock_mean_cov,
    ladder,
    number_distribution,
    number_operator,
    pgf_oracle,
    product_state,
    rotation_operator,
    rotation_symplectic,
    run_script_fock,
    run_script_gaussian,
    squeeze_operator,
    squeeze_symplectic,
    thermal_fock,
    vacuum_fock,
    weyl_operator,
)
from gausscount.states import Displacement, conjugate, displace, thermal, vacuum
from gausscount.symplectic import embed


def test_ladder_small_matrix():
    expected = np.array([[0, 1, 0], [0, 0, np.sqrt(2)], [0, 0, 0]])
    np.testing.assert_allclose(ladder(3), expected, atol=1e-15)


def test_number_operator_diagonal():
    a = ladder(5)
    np.testing.assert_allclose(a.conj().T @ a, number_operator(5), atol=1e-14)


def test_commutator_holds_away_from_edge():
    a = ladder(8)
    comm = a @ a.conj().T - a.conj().T @ a
    np.testing.assert_allclose(comm[:-1, :-1], np.eye(7), atol=1e-12)


def test_ladder_rejects_tiny_dim():
    with pytest.raises(Exception):
        ladder(1)


def test_weyl_zero_is_identity():
    np.testing.assert_allclose(weyl_operator(0.0, 16), np.eye(16), atol=1e-12)


def test_weyl_coherent_mean():
    dim = 64
    op = weyl_operator(1.0, dim)
    psi = op[:, 0]
    mean = np.real(psi.conj() @ number_operator(dim) @ psi)
    assert mean == pytest.approx(1.0, abs=1e-8)


def test_weyl_inverse():
    dim = 32
    u = 0.6 - 0.2j
    prod = weyl_operator(u, dim) @ weyl_operator(-u, dim)
    np.testing.assert_allclose(prod, np.eye(dim), atol=1e-8)


def test_weyl_guard_trips():
    with pytest.raises(TruncationRiskError):
        weyl_operator(3.0, 16)


def test_squeeze_zero_is_identity():
    np.testing.assert_allclose(squeeze_operator(0.0, 16), np.eye(16), atol=1e-12)


def test_squeeze_mean_photons():
    dim, r = 128, 1.0
    psi = squeeze_operator(r, dim)[:, 0]
    mean = np.real(psi.conj() @ number_operator(dim) @ psi)
    assert mean == pytest.approx(np.sinh(r) ** 2, abs=1e-6)
    # same number from the analytic covariance diag(e^{2r}, e^{-2r})/2
    analytic = counting.mean_N(conjugate(vacuum(1), squeeze_symplectic(r, 0.0)))
    assert mean == pytest.approx(analytic, abs=1e-6)


def test_squeeze_guard_trips():
    with pytest.raises(TruncationRiskError):
        squeeze_operator(2.5, 32)


def test_rotation_operator_unitary_diag():
    op = rotation_operator(0.0, 8)
    np.testing.assert_allclose(op, np.eye(8), atol=1e-15)
    op = rotation_operator(0.7, 8)
    np.testing.assert_allclose(op @ op.conj().T, np.eye(8), atol=1e-14)


def test_beamsplitter_conserves_total_count():
    dim = 12
    bs = beamsplitter_operator(0.6, 0.9, dim)
    total = embed_one_mode(number_operator(dim), 1, dim) + embed_one_mode(
        number_operator(dim), 2, dim
    )
    np.testing.assert_allclose(bs @ total - total @ bs, 0.0, atol=1e-8)


def test_beamsplitter_unitary():
    dim = 10
    bs = beamsplitter_operator(1.1, 0.3, dim)
    np.testing.assert_allclose(bs.conj().T @ bs, np.eye(dim * dim), atol=1e-10)


def test_beamsplitter_zero_angle_identity():
    np.testing.assert_allclose(beamsplitter_operator(0.0, 0.4, 6), np.eye(36), atol=1e-14)


def test_unitaries_on_safe_subspace():
    # U+U = I within 1e-8 away from the truncation edge (top decile excluded)
    dim = 48
    safe = np.arange(int(0.9 * (dim - 1)))
    for op in (weyl_operator(1.2 + 0.5j, dim), squeeze_operator(0.8j, dim)):
        gram = op.conj().T @ op
        np.testing.assert_allclose(gram[np.ix_(safe, safe)], np.eye(safe.size), atol=1e-8)


def test_number_distribution_vacuum():
    dist = number_distribution(vacuum_fock(1, 8))
    assert dist[0] == pytest.approx(1.0, abs=1e-14)
    assert np.max(dist[1:]) <= 1e-14


def test_number_distribution_coherent_poisson():
    import math

    dim = 64
    state = apply_unitary(vacuum_fock(1, dim), weyl_operator(1.0, dim))
    dist = number_distribution(state)
    ks = np.arange(dist.size)
    expected = np.exp(-1.0) / np.array([math.factorial(int(k)) for k in ks[:30]], dtype=float)
    np.testing.assert_allclose(dist[:30], expected, atol=1e-8)


def test_number_distribution_thermal_geometric():
    t, dim = 0.8, 128
    dist = number_distribution(thermal_fock(t, dim))
    q = np.exp(-t)
    np.testing.assert_allclose(dist[:30], (1 - q) * q ** np.arange(30), atol=1e-10)


def test_number_distribution_nonnegative():
    dist = number_distribution(thermal_fock(0.5, 128))
    assert np.min(dist) >= -1e-10


def test_truncation_edge_mass_raises():
    with pytest.raises(TruncationRiskError):
        number_distribution(thermal_fock(0.05, 16))


def test_pgf_oracle_endpoints():
    state = thermal_fock(0.9, 64)
    assert pgf_oracle(state, 1.0) == pytest.approx(1.0, abs=1e-6)
    dist = number_distribution(state)
    assert pgf_oracle(state, 0.0) == pytest.approx(dist[0], abs=1e-14)


def test_pgf_oracle_matches_closed_form():
    ops = [{"op": "squeeze", "mode": 1, "r": 0.5, "phi": 0.9},
           {"op": "displace", "mode": 1, "re": 0.6, "im": -0.4}]
    analytic = run_script_gaussian(1, {"kind": "vacuum"}, ops)
    oracle = run_script_fock(1, {"kind": "vacuum"}, ops, 64)
    for x in (0.0, 0.3, 0.7, 1.0):
        assert pgf_oracle(oracle, x) == pytest.approx(
            counting.total_pgf(analytic, x), abs=1e-6
        )


def test_thermal_fock_moments():
    t, dim = 0.5, 128
    state = thermal_fock(t, dim)
    dist = number_distribution(state)
    mean = dist @ np.arange(dist.size)
    assert mean == pytest.approx(1.0 / (np.exp(t) - 1.0), abs=1e-6)
    purity = np.real(np.trace(state.rho @ state.rho))
    assert purity == pytest.approx((1 - np.exp(-t)) / (1 + np.exp(-t)), abs=1e-6)


def test_thermal_fock_large_t_is_vacuum():
    state = thermal_fock(25.0, 16)
    assert np.real(state.rho[0, 0]) == pytest.approx(1.0, abs=1e-10)


def test_fock_state_validation():
    with pytest.raises(ValueError):
        FockState(1, 4, np.eye(4, dtype=complex))  # trace 4
    bad = np.zeros((4, 4), dtype=complex)
    bad[0, 1] = 1.0
    bad[0, 0] = 1.0
    with pytest.raises(ValueError):
        FockState(1, 4, bad)


# ---------------------------------------------------------------------------
# Calibration contract: each truncated unitary realises exactly the
# symplectic matrix / displacement claimed by its *_symplectic twin.

def _displaced_input(dim):
    op = weyl_operator(0.4 + 0.25j, dim)
    state = apply_unitary(vacuum_fock(1, dim), op)
    analytic = displace(vacuum(1), Displacement([0.4], [0.25]))
    return state, analytic


def _assert_state_match(fock_state, gaussian_state, tol=1e-6):
    l, m, S = fock_mean_cov(fock_state)
    np.testing.assert_allclose(l, gaussian_state.l, atol=tol)
    np.testing.assert_allclose(m, gaussian_state.m, atol=tol)
    np.testing.assert_allclose(S, gaussian_state.S, atol=tol)


def test_calibration_weyl():
    dim = 48
    state, analytic = _displaced_input(dim)
    u = Displacement([-0.3], [0.5])
    moved = apply_unitary(state, weyl_operator(-0.3 + 0.5j, dim))
    _assert_state_match(moved, displace(analytic, u))


@pytest.mark.parametrize("r,phi", [(0.35, 0.0), (0.5, 0.9), (0.4, -1.3)])
def test_calibration_squeeze(r, phi):
    dim = 56
    state, analytic = _displaced_input(dim)
    squeezed = apply_unitary(state, squeeze_operator(r * np.exp(1j * phi), dim))
    _assert_state_match(squeezed, conjugate(analytic, squeeze_symplectic(r, phi)))


@pytest.mark.parametrize("theta", [0.4, 2.1])
def test_calibration_rotation(theta):
    dim = 48
    state, analytic = _displaced_input(dim)
    rotated = apply_unitary(state, rotation_operator(theta, dim))
    _assert_state_match(rotated, conjugate(analytic, rotation_symplectic(theta)))


def test_calibration_rotation_on_thermal():
    dim = 64
    state = thermal_fock(0.9, dim)
    rotated = apply_unitary(state, rotation_operator(0.8, dim))
    _assert_state_match(rotated, conjugate(thermal([0.9]), rotation_symplectic(0.8)))


@pytest.mark.parametrize("theta,phi", [(0.6, 0.0), (0.7, 1.1)])
def test_calibration_beamsplitter(theta, phi):
    dim = 18
    one = apply_unitary(vacuum_fock(1, dim), weyl_operator(0.5 + 0.2j, dim))
    two = apply_unitary(vacuum_fock(1, dim), weyl_operator(-0.3 + 0.1j, dim))
    pair = product_state(one, two)
    mixed = apply_unitary(pair, beamsplitter_operator(theta, phi, dim))
    analytic = displace(
        vacuum(2), Displacement([0.5, -0.3], [0.2, 0.1])
    )
    expected = conjugate(analytic, beamsplitter_symplectic(theta, phi))
    _assert_state_match(mixed, expected)


def test_calibration_embedded_one_mode_gate():
    # a one-mode squeeze on wire 2 of a pair matches the embedded matrix
    dim = 16
    pair = product_state(vacuum_fock(1, dim), vacuum_fock(1, dim))
    op = embed_one_mode(squeeze_operator(0.3, dim), 2, dim)
    out = apply_unitary(pair, op)
    expected = conjugate(vacuum(2), embed(squeeze_symplectic(0.3, 0.0), [2], 2))
    _assert_state_match(out, expected)


def test_scripted_state_matches_analytic_distribution():
    ops = [
        {"op": "squeeze", "mode": 1, "r": 0.5, "phi": 0.0},
        {"op": "beamsplitter", "theta": 0.7, "phi": 0.3},
        {"op": "displace", "mode": 2, "re": 0.4, "im": 0.2},
    ]
    analytic = run_script_gaussian(2, {"kind": "vacuum"}, ops)
    oracle = run_script_fock(2, {"kind": "vacuum"}, ops, 24)
    dist = number_distribution(oracle)
    probs = counting.pmf(analytic, dist.size - 1)
    np.testing.assert_allclose(probs, dist, atol=1e-6)


def test_script_thermal_input():
    ops = [{"op": "rotate", "mode": 1, "theta": 0.9}]
    analytic = run_script_gaussian(1, {"kind": "thermal", "t": [1.1]}, ops)
    oracle = run_script_fock(1, {"kind": "thermal", "t": [1.1]}, ops, 64)
    dist = number_distribution(oracle)
    np.testing.assert_allclose(counting.pmf(analytic, dist.size - 1), dist, atol=1e-8)


def test_fourier_transform_matches_truncated_trace():
    # pins the transform's sign conventions against Tr(rho W(u)) directly
    from gausscount.states import fourier_transform

    dim = 64
    ops = [{"op": "squeeze", "mode": 1, "r": 0.5, "phi": 0.7},
           {"op": "displace", "mode": 1, "re": 0.4, "im": -0.6}]
    analytic = run_script_gaussian(1, {"kind": "vacuum"}, ops)
    oracle = run_script_fock(1, {"kind": "vacuum"}, ops, dim)
    for x, y in [(0.3, 0.2), (-0.5, 0.8), (1.0, 0.0)]:
        direct = complex(np.trace(oracle.rho @ weyl_operator(complex(x, y), dim)))
        assert abs(direct - fourier_transform(analytic, [x], [y])) <= 1e-10


def test_overlap_matches_truncated_trace():
    from gausscount.states import overlap

    dim = 64
    script_a = ({"kind": "thermal", "t": [0.9]},
                [{"op": "displace", "mode": 1, "re": 0.5, "im": 0.1}])
    script_b = ({"kind": "vacuum"},
                [{"op": "squeeze", "mode": 1, "r": 0.5, "phi": 0.7},
                 {"op": "displace", "mode": 1, "re": 0.4, "im": -0.6}])
    ga, gb = (run_script_gaussian(1, *s) for s in (script_a, script_b))
    fa, fb = (run_script_fock(1, *s, dim) for s in (script_a, script_b))
    direct = float(np.real(np.trace(fa.rho @ fb.rho)))
    assert direct == pytest.approx(overlap(ga, gb), abs=1e-10)


def test_joint_pgf_matches_two_mode_diagonal():
    dim = 24
    ops = [{"op": "squeeze", "mode": 1, "r": 0.5},
           {"op": "beamsplitter", "theta": 0.6, "phi": 0.4},
           {"op": "displace", "mode": 2, "re": 0.3, "im": 0.2}]
    analytic = run_script_gaussian(2, {"kind": "vacuum"}, ops)
    oracle = run_script_fock(2, {"kind": "vacuum"}, ops, dim)
    diag = np.real(np.diag(oracle.rho)).reshape(dim, dim)
    for xs in ([0.3, 0.7], [0.5, 0.5]):
        grid = np.outer(xs[0] ** np.arange(dim), xs[1] ** np.arange(dim))
        direct = float((diag * grid).sum())
        assert direct == pytest.approx(counting.joint_pgf(analytic, xs), abs=1e-10)


def test_script_rejects_unknown_op():
    with pytest.raises(ValueError):
        run_script_gaussian(1, {"kind": "vacuum"}, [{"op": "teleport"}])
    with pytest.raises(ValueError):
        run_script_fock(1, {"kind": "vacuum"}, [{"op": "beamsplitter"}], 16)
