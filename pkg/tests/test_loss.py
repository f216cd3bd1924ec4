import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density, random_pure, random_two_mode_density, random_two_mode_pure, seeds, transmittivities
from mqsdeco import (
    CatParams,
    LossSetting,
    SingleModeDensity,
    TruncationPolicy,
    TwoModeDensity,
    apply_loss_single_mode,
    apply_loss_two_mode,
    binomial_thinning,
    cat_state,
    kraus_branches,
    kraus_operators,
    lossy_cat_analytic,
    mean_photon_number,
    number_distribution,
    tensor_product,
)
from mqsdeco.fock import fock_state


def beam_splitter_oracle(rho, T):
    """Mix ``rho`` with vacuum on a beam splitter built from expm, then trace out the second port."""
    d = rho.shape[0]
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    eye = np.eye(d)
    a_sys, a_env = np.kron(a, eye), np.kron(eye, a)
    theta = math.acos(math.sqrt(T))
    # total photon number is conserved, so truncating each port at d is exact here
    u = scipy.linalg.expm(theta * (a_sys.conj().T @ a_env - a_env.conj().T @ a_sys))
    vac = np.zeros((d, d))
    vac[0, 0] = 1.0
    big = u @ np.kron(rho, vac) @ u.conj().T
    return np.einsum("ikjk->ij", big.reshape(d, d, d, d))


def test_single_photon_at_t06_by_hand():
    out = apply_loss_single_mode(fock_state(1, 3).density(), LossSetting(0.6))
    assert np.allclose(out.matrix, np.diag([0.4, 0.6, 0.0, 0.0]), atol=1e-15)


def test_coherence_between_zero_and_one_scales_with_sqrt_t():
    rho = SingleModeDensity(np.full((2, 2), 0.5))
    out = apply_loss_single_mode(rho, LossSetting(0.36))
    assert out.matrix[0, 1] == pytest.approx(0.5 * 0.6)
    assert out.matrix[1, 1] == pytest.approx(0.5 * 0.36)


def test_matches_beam_splitter_unitary(rng):
    for T in (0.0, 0.3, 0.75, 1.0):
        rho = random_density(rng, 6)
        out = apply_loss_single_mode(rho, LossSetting(T))
        assert np.allclose(out.matrix, beam_splitter_oracle(np.asarray(rho.matrix), T), atol=1e-12)


def test_kraus_operators_are_complete_and_reproduce_channel(rng):
    loss = LossSetting(0.45)
    ops = kraus_operators(7, loss)
    completeness = np.einsum("jki,jkl->il", ops, ops)
    assert np.allclose(completeness, np.eye(8), atol=1e-13)
    rho = random_density(rng, 7)
    by_sum = sum(k @ rho.matrix @ k.T for k in ops)
    assert np.allclose(apply_loss_single_mode(rho, loss).matrix, by_sum, atol=1e-14)


def test_pure_input_is_accepted(rng):
    s = random_pure(rng, 4)
    loss = LossSetting(0.5)
    assert np.allclose(apply_loss_single_mode(s, loss).matrix, apply_loss_single_mode(s.density(), loss).matrix)


@settings(max_examples=40, deadline=None)
@given(seeds, transmittivities, transmittivities)
def test_channel_properties(seed, t1, t2):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 8)
    once = apply_loss_single_mode(rho, LossSetting(t1))
    assert abs(np.trace(once.matrix).real - 1.0) <= 1e-12
    assert np.linalg.eigvalsh(once.matrix)[0] > -1e-12
    twice = apply_loss_single_mode(once, LossSetting(t2))
    direct = apply_loss_single_mode(rho, LossSetting(t1 * t2))
    assert np.abs(twice.matrix - direct.matrix).max() <= 1e-10
    assert mean_photon_number(once) == pytest.approx(t1 * mean_photon_number(rho), abs=1e-10)


def test_zero_transmittivity_gives_vacuum(rng):
    out = apply_loss_single_mode(random_density(rng, 5), LossSetting(0.0))
    vac = np.zeros((6, 6))
    vac[0, 0] = 1.0
    assert np.allclose(out.matrix, vac, atol=1e-15)


def test_unit_transmittivity_is_identity(rng):
    rho = random_density(rng, 5)
    assert np.allclose(apply_loss_single_mode(rho, LossSetting(1.0)).matrix, rho.matrix)


def test_loss_setting_validation():
    with pytest.raises(ValueError):
        LossSetting(1.2)
    with pytest.raises(ValueError):
        LossSetting.from_reflectivity(-0.1)
    assert LossSetting.from_reflectivity(0.25).T == 0.75
    assert LossSetting(0.75).R == pytest.approx(0.25)


def test_two_mode_loss_on_product_states_factorizes(rng):
    a, b = random_density(rng, 3), random_density(rng, 3)
    loss = LossSetting(0.4)
    joint = apply_loss_two_mode(tensor_product(a, b), loss)
    separate = tensor_product(apply_loss_single_mode(a, loss), apply_loss_single_mode(b, loss))
    assert np.allclose(joint.matrix, separate.matrix, atol=1e-14)


@settings(max_examples=20, deadline=None)
@given(seeds, transmittivities)
def test_two_mode_loss_properties(seed, t):
    rng = np.random.default_rng(seed)
    rho = random_two_mode_density(rng, 3)
    out = apply_loss_two_mode(rho, LossSetting(t))
    assert isinstance(out, TwoModeDensity) and out.basis == rho.basis
    assert abs(np.trace(out.matrix).real - 1.0) <= 1e-12
    assert mean_photon_number(out) == pytest.approx(t * mean_photon_number(rho), abs=1e-10)


def test_binomial_thinning_is_the_channel_diagonal(rng):
    loss = LossSetting(0.7)
    rho = random_density(rng, 6)
    expected = number_distribution(apply_loss_single_mode(rho, loss)).probabilities
    assert np.allclose(binomial_thinning(number_distribution(rho), loss).probabilities, expected, atol=1e-14)
    rho2 = random_two_mode_density(rng, 3)
    expected2 = number_distribution(apply_loss_two_mode(rho2, loss)).probabilities
    assert np.allclose(binomial_thinning(number_distribution(rho2), loss).probabilities, expected2, atol=1e-14)


def test_kraus_branches_rebuild_the_lossy_state(rng):
    loss = LossSetting(0.55)
    s = random_pure(rng, 6)
    a = kraus_branches(s, loss, drop_budget=0.0)
    assert np.allclose(a @ a.conj().T, apply_loss_single_mode(s, loss).matrix, atol=1e-14)
    s2 = random_two_mode_pure(rng, 3)
    b = kraus_branches(s2, loss, drop_budget=0.0)
    assert np.allclose(b @ b.conj().T, apply_loss_two_mode(s2, loss).matrix, atol=1e-14)
    with pytest.raises(TypeError):
        kraus_branches(s.density(), loss)


def test_kraus_branches_drop_only_within_budget(rng):
    loss = LossSetting(0.9)
    s = random_pure(rng, 10)
    full = kraus_branches(s, loss, drop_budget=0.0)
    norms = np.sort(np.linalg.norm(full, axis=0))
    budget = norms[:3].sum() + 1e-18
    trimmed = kraus_branches(s, loss, drop_budget=budget)
    assert trimmed.shape[1] == full.shape[1] - 3


@pytest.mark.parametrize("phi", [math.pi / 2, math.pi / 4])
@pytest.mark.parametrize("sign", [+1, -1])
def test_numeric_cat_loss_matches_coherent_state_closed_form(phi, sign):
    # truncating before the loss leaves amplitude errors of order sqrt(epsilon_tail)
    cat = CatParams(2.0, phi, sign)
    loss = LossSetting(0.65)
    policy = TruncationPolicy(1e-15)
    numeric = apply_loss_single_mode(cat_state(cat, policy).density(), loss)
    analytic = lossy_cat_analytic(cat, loss, policy)
    assert np.allclose(numeric.matrix, analytic.matrix, atol=1e-9)
