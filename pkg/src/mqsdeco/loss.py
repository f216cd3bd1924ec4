"""Pure-loss channel: a beam splitter of transmittivity T with the reflected port traced out."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlogy

from .fock import (
    PhotonDistribution,
    SingleModeDensity,
    SingleModePureState,
    TruncationPolicy,
    TwoModeDensity,
    TwoModePureState,
    normalize,
)
from .metrics import surviving_indices


@dataclass(frozen=True)
class LossSetting:
    """Beam-splitter transmittivity; the reflectivity is always ``1 - T``."""

    T: float

    def __post_init__(self):
        if not 0.0 <= self.T <= 1.0:
            raise ValueError(f"transmittivity must lie in [0, 1], got {self.T}")
        object.__setattr__(self, "T", float(self.T))

    @classmethod
    def from_reflectivity(cls, R: float) -> "LossSetting":
        return cls(1.0 - R)

    @property
    def R(self) -> float:
        return 1.0 - self.T


def _binomial_table(n_max: int, p: float, q: float) -> np.ndarray:
    """``b[k, n] = binom(n, k) p^k q^(n-k)`` with ``q = 1 - p`` passed separately.

    Log space keeps subnormal probabilities finite, and taking ``q`` as an
    input avoids the cancellation in ``1 - p``.
    """
    n = np.arange(n_max + 1)[None, :]
    k = np.arange(n_max + 1)[:, None]
    rest = np.clip(n - k, 0, None)
    log_b = gammaln(n + 1) - gammaln(k + 1) - gammaln(rest + 1) + xlogy(k, p) + xlogy(rest, q)
    return np.where(k <= n, np.exp(log_b), 0.0)


def kraus_weights(n_max: int, loss: LossSetting) -> np.ndarray:
    """``w[j, n] = sqrt(binom(n, j) T^(n-j) R^j)``: the amplitude for losing j of n photons."""
    return np.sqrt(_binomial_table(n_max, loss.R, loss.T))


def kraus_operators(n_max: int, loss: LossSetting) -> np.ndarray:
    """Stack of Kraus matrices ``K_j = sum_n w[j, n] |n - j><n|``, shape ``(n_max+1, d, d)``."""
    w = kraus_weights(n_max, loss)
    d = n_max + 1
    ops = np.zeros((d, d, d))
    for j in range(d):
        n = np.arange(j, d)
        ops[j, n - j, n] = w[j, j:]
    return ops


def _lose_on_axes(rho: np.ndarray, w: np.ndarray, ax_ket: int, ax_bra: int) -> np.ndarray:
    """Apply the loss map to one mode of ``rho`` given its ket and bra axes."""
    d = w.shape[0]
    out = np.zeros_like(rho)
    for j in range(d):
        coeff = np.multiply.outer(w[j, j:], w[j, j:])
        src = [slice(None)] * rho.ndim
        dst = [slice(None)] * rho.ndim
        src[ax_ket] = src[ax_bra] = slice(j, d)
        dst[ax_ket] = dst[ax_bra] = slice(0, d - j)
        shape = [1] * rho.ndim
        shape[ax_ket] = shape[ax_bra] = d - j
        out[tuple(dst)] += coeff.reshape(shape) * rho[tuple(src)]
    return out


def apply_loss_single_mode(rho: SingleModeDensity, loss: LossSetting) -> SingleModeDensity:
    """Send a single-mode state through the loss channel.

    Equivalent to ``sum_j K_j rho K_j^dag`` with the Kraus sum running up to
    ``n_max``, which is exact on the truncated space.
    """
    if isinstance(rho, SingleModePureState):
        rho = rho.density()
    w = kraus_weights(rho.n_max, loss)
    out = _lose_on_axes(np.asarray(rho.matrix), w, 0, 1)
    return SingleModeDensity(_hermitize(out), rho.tail_mass)


def apply_loss_two_mode(rho: TwoModeDensity, loss: LossSetting) -> TwoModeDensity:
    """Equal loss on both polarization modes (a polarization-insensitive beam splitter)."""
    if isinstance(rho, TwoModePureState):
        rho = rho.density()
    w = kraus_weights(rho.n_max, loss)
    t = rho.tensor()
    t = _lose_on_axes(t, w, 0, 2)
    t = _lose_on_axes(t, w, 1, 3)
    d2 = t.shape[0] ** 2
    return TwoModeDensity(_hermitize(t.reshape(d2, d2)), rho.basis, rho.tail_mass)


def _hermitize(m: np.ndarray) -> np.ndarray:
    # the map is exactly trace preserving, so only round-off asymmetry is removed
    return 0.5 * (m + m.conj().T)


def binomial_thinning(dist: PhotonDistribution, loss: LossSetting) -> PhotonDistribution:
    """Diagonal of the loss channel: each photon survives independently with probability T."""
    p = np.asarray(dist.probabilities)
    b = _binomial_table(p.shape[0] - 1, loss.T, loss.R)  # b[m, n] = P(m survive | n)
    if p.ndim == 1:
        return PhotonDistribution(b @ p)
    return PhotonDistribution(b @ p @ b.T)


def kraus_branches(state, loss: LossSetting, *, drop_budget: float = 1e-10) -> np.ndarray:
    """Unnormalized branch vectors ``K_j psi`` (or ``(K_j x K_l) psi``) as matrix columns.

    The lossy density matrix is ``A @ A.conj().T`` for the returned ``A``.
    Branches are dropped smallest first as long as the sum of their norms
    stays within ``drop_budget``; a fidelity computed from the factor then
    moves by at most that amount.
    """
    if not isinstance(state, (SingleModePureState, TwoModePureState)):
        raise TypeError(f"kraus_branches needs a pure state, got {type(state).__name__}")
    psi = np.asarray(state.amplitudes)
    w = kraus_weights(state.n_max, loss)
    d = psi.shape[0]
    if isinstance(state, SingleModePureState):
        norms = np.sqrt((w**2) @ np.abs(psi) ** 2)
        keep = surviving_indices(norms, drop_budget)
        cols = np.zeros((d, keep.size), dtype=complex)
        for c, j in enumerate(keep):
            cols[: d - j, c] = w[j, j:] * psi[j:]
        return cols
    else:
        w2 = w**2
        norms = np.sqrt(np.clip(w2 @ np.abs(psi) ** 2 @ w2.T, 0.0, None))
        keep = surviving_indices(norms.reshape(-1), drop_budget)
        cols = np.zeros((d * d, keep.size), dtype=complex)
        grid = cols.reshape(d, d, keep.size)
        for c, flat in enumerate(keep):
            j, l = divmod(int(flat), d)
            grid[: d - j, : d - l, c] = np.outer(w[j, j:], w[l, l:]) * psi[j:, l:]
        return cols


def lossy_cat_analytic(cat, loss: LossSetting, policy: TruncationPolicy | None = None) -> SingleModeDensity:
    """Closed-form lossy cat built from coherent-state outer products.

    With ``beta_k = sqrt(T) alpha_k`` and the environment overlap
    ``c = <sqrt(R) alpha_2 | sqrt(R) alpha_1>`` the output is proportional to
    ``|b1><b1| + |b2><b2| +/- (c |b1><b2| + c* |b2><b1|)``. The normalization is
    exact rather than the large-amplitude value 1/2, which differs from it by
    a relative amount of order ``exp(-2 |alpha|^2 sin^2 phi)``.
    """
    from .generators import _coherent_amplitudes, _poisson_cutoff

    policy = policy or TruncationPolicy()
    a1 = cat.alpha * np.exp(1j * cat.phi)
    a2 = cat.alpha * np.exp(-1j * cat.phi)
    st = math.sqrt(loss.T)
    # same cutoff for both components
    n_max, tail = _poisson_cutoff(cat.alpha**2, policy)
    b1 = _coherent_amplitudes(st * a1, n_max)
    b2 = _coherent_amplitudes(st * a2, n_max)
    c = np.exp(-loss.R * cat.alpha**2 + loss.R * np.conj(a2) * a1)
    rho = np.outer(b1, b1.conj()) + np.outer(b2, b2.conj())
    rho = rho + cat.sign * (c * np.outer(b1, b2.conj()) + np.conj(c) * np.outer(b2, b1.conj()))
    return SingleModeDensity(normalize(rho, density=True), tail)
