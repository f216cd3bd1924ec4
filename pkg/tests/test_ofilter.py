import numpy as np
import pytest

from conftest import random_two_mode_density
from mqsdeco import (
    FilterAnnihilationError,
    GainSetting,
    LossSetting,
    TwoModeDensity,
    apply_loss_two_mode,
    apply_ofilter,
    ofilter_mask,
    qiopa_macrostate_pm,
)
from mqsdeco.fock import two_mode_fock_state
from mqsdeco.ofilter import filter_factor


def test_mask_counts_imbalance():
    mask = ofilter_mask(1, 3)
    assert mask.shape == (4, 4)
    assert mask[0, 2] and mask[3, 0] and mask[1, 3]
    assert not mask[1, 2] and not mask[2, 2] and not mask[0, 1]
    assert ofilter_mask(0, 2).sum() == 6


@pytest.mark.parametrize("k", [-1, 1.5])
def test_bad_threshold_raises(k):
    with pytest.raises(ValueError):
        ofilter_mask(k, 3)


def test_success_probability_on_diagonal_state():
    p = np.zeros((3, 3))
    p[0, 0], p[2, 0], p[1, 2], p[0, 2] = 0.4, 0.3, 0.2, 0.1
    rho = TwoModeDensity(np.diag(p.reshape(-1)))
    out, success = apply_ofilter(rho, 1)
    assert success == pytest.approx(0.4)
    q = np.diag(out.matrix).real.reshape(3, 3)
    assert q[2, 0] == pytest.approx(0.75) and q[0, 2] == pytest.approx(0.25)


def test_balanced_state_is_annihilated():
    with pytest.raises(FilterAnnihilationError):
        apply_ofilter(two_mode_fock_state(1, 1, 2).density(), 0)


def test_filter_is_idempotent(rng):
    rho = random_two_mode_density(rng, 3)
    once, p = apply_ofilter(rho, 1)
    twice, q = apply_ofilter(once, 1)
    assert 0 < p < 1
    assert q == pytest.approx(1.0)
    assert np.allclose(once.matrix, twice.matrix)
    assert once.basis == rho.basis


def test_factor_version_agrees(rng):
    a = rng.normal(size=(16, 5)) + 1j * rng.normal(size=(16, 5))
    a /= np.linalg.norm(a)
    rho = TwoModeDensity(a @ a.conj().T)
    out, p = apply_ofilter(rho, 0)
    fa, q = filter_factor(a, 0, 3)
    assert q == pytest.approx(p)
    assert np.allclose(fa @ fa.conj().T, out.matrix)


def test_success_probability_falls_with_threshold():
    state = qiopa_macrostate_pm(GainSetting(0.3), "+")
    lossy = apply_loss_two_mode(state.density(), LossSetting(0.7))
    probs = [apply_ofilter(lossy, k)[1] for k in range(4)]
    assert all(a > b for a, b in zip(probs, probs[1:]))
