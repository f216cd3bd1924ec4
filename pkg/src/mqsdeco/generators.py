"""Coherent states, cat states and quantum-injected parametric-amplifier macrostates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import TruncationError
from .fock import (
    ModeBasis,
    SingleModePureState,
    TruncationPolicy,
    TwoModePureState,
    normalize,
    tensor_product,
)

PLUS_MINUS = ModeBasis.equatorial(0.0)


@dataclass(frozen=True)
class CatParams:
    """Cat superposition of ``|alpha e^{i phi}>`` and ``|alpha e^{-i phi}>``.

    ``phi = pi/2`` gives the usual ``|alpha> +/- |-alpha>`` pair up to a global
    rotation of phase space.
    """

    alpha: float
    phi: float = math.pi / 2
    sign: int = +1

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha is a magnitude and must be >= 0")
        if self.sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def lost_photons_scale(self) -> float:
        """``|alpha|^2 sin^2 phi``: multiply by R to get the universal coordinate x."""
        return self.alpha**2 * math.sin(self.phi) ** 2


@dataclass(frozen=True)
class GainSetting:
    """Parametric gain ``g`` with ``C = cosh g`` and ``Gamma = tanh g``."""

    g: float

    def __post_init__(self):
        if self.g < 0:
            raise ValueError("gain must be >= 0")

    @property
    def C(self) -> float:
        return math.cosh(self.g)

    @property
    def Gamma(self) -> float:
        return math.tanh(self.g)

    @property
    def mean_photons(self) -> float:
        """Mean output photon number for one injected photon: ``1 + 4 sinh^2 g``."""
        return 1.0 + 4.0 * math.sinh(self.g) ** 2


def _coherent_amplitudes(alpha: complex, n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1)
    r = abs(alpha)
    if r == 0:
        out = np.zeros(n_max + 1, dtype=complex)
        out[0] = 1.0
        return out
    logmag = -0.5 * r * r + n * math.log(r) - 0.5 * gammaln(n + 1)
    return np.exp(logmag) * np.exp(1j * np.angle(alpha) * n)


def coherent_state(
    alpha: complex, policy: TruncationPolicy | None = None, *, n_max: int | None = None
) -> SingleModePureState:
    """Coherent state ``e^{-|alpha|^2/2} sum alpha^n / sqrt(n!) |n>``.

    The cutoff is the smallest one leaving Poisson tail mass below
    ``policy.epsilon_tail`` unless ``n_max`` is given explicitly.

    Raises:
        TruncationError: if the required cutoff exceeds ``policy.n_cap``.
    """
    mean = abs(alpha) ** 2
    if n_max is None:
        policy = policy or TruncationPolicy()
        n_max, tail = _poisson_cutoff(mean, policy)
    else:
        tail = float(poisson.sf(n_max, mean))
    amps = _coherent_amplitudes(alpha, n_max)
    return SingleModePureState(normalize(amps), tail)


def _poisson_cutoff(mean: float, policy: TruncationPolicy) -> tuple[int, float]:
    n = np.arange(policy.n_cap + 1)
    sf = poisson.sf(n, mean)
    ok = np.nonzero(sf <= policy.epsilon_tail)[0]
    if not ok.size:
        raise TruncationError(
            f"coherent amplitude {math.sqrt(mean):.4g} needs more than n_cap={policy.n_cap} photons"
        )
    return int(ok[0]), float(sf[ok[0]])


def cat_state(params: CatParams, policy: TruncationPolicy | None = None) -> SingleModePureState:
    """Normalized ``|alpha e^{i phi}> + sign |alpha e^{-i phi}>``.

    Raises:
        DegenerateStateError: when the two components cancel, e.g. sign=-1 at alpha=0.
    """
    policy = policy or TruncationPolicy()
    n_max, tail = _poisson_cutoff(params.alpha**2, policy)
    a = _coherent_amplitudes(params.alpha * np.exp(1j * params.phi), n_max)
    b = _coherent_amplitudes(params.alpha * np.exp(-1j * params.phi), n_max)
    return SingleModePureState(normalize(a + params.sign * b), tail)


def squeezed_amplitudes(g: float, theta: float, photons: int, n_max: int) -> np.ndarray:
    """Fock amplitudes of ``S|0>`` or ``S|1>`` with ``S = exp[(z a^dag2 - z* a^2)/2]``, ``z = g e^{i theta}``.

    ``S|0> = C^{-1/2} sum (e^{i theta} Gamma/2)^k sqrt((2k)!)/k! |2k>`` and
    ``S|1> = C^{-3/2} sum (e^{i theta} Gamma/2)^k sqrt((2k+1)!)/k! |2k+1>``.
    """
    if photons not in (0, 1):
        raise ValueError("only vacuum or single-photon inputs are supported")
    out = np.zeros(n_max + 1, dtype=complex)
    k = np.arange((n_max - photons) // 2 + 1)
    n = 2 * k + photons
    gam = math.tanh(g)
    if gam == 0.0:
        out[photons] = 1.0
        return out
    logmag = (
        -(photons + 0.5) * math.log(math.cosh(g))
        + k * math.log(gam / 2)
        + 0.5 * gammaln(n + 1)
        - gammaln(k + 1)
    )
    out[n] = np.exp(logmag) * np.exp(1j * theta * k)
    return out


def _squeezed_cutoff(g: float, photons: int, policy: TruncationPolicy) -> tuple[int, float]:
    # distribution evaluated far enough past the cap for the cumulative tail to be exact
    probe = max(4 * policy.n_cap, 64)
    p = np.abs(squeezed_amplitudes(g, 0.0, photons, probe)) ** 2
    return policy.cutoff(p)


def _common_cutoff(gain: GainSetting, policy: TruncationPolicy) -> int:
    # squeezed vacuum and squeezed photon share one grid
    return max(_squeezed_cutoff(gain.g, 1, policy)[0], _squeezed_cutoff(gain.g, 0, policy)[0], 1)


def squeezed_state(
    g: float, theta: float, photons: int = 0, policy: TruncationPolicy | None = None,
    *, n_max: int | None = None,
) -> SingleModePureState:
    """Single-mode squeezed vacuum (``photons=0``) or squeezed single photon (``photons=1``)."""
    policy = policy or TruncationPolicy()
    if n_max is None:
        n_max = max(_squeezed_cutoff(g, photons, policy)[0], photons)
    amps = squeezed_amplitudes(g, theta, photons, n_max)
    # the amplitudes are exact, so the missing probability is the tail
    tail = float(max(0.0, 1.0 - np.vdot(amps, amps).real))
    return SingleModePureState(normalize(amps), tail)


def qiopa_pole_state(
    gain: GainSetting, pole: str = "H", policy: TruncationPolicy | None = None
) -> TwoModePureState:
    """Amplified H or V photon: ``C^-2 sum_i Gamma^i sqrt(i+1) |(i+1) pole, i orthogonal>``.

    The result is in the HV basis (H first), so a V pole occupies ``(i, i+1)``.
    """
    if pole not in ("H", "V"):
        raise ValueError("pole must be 'H' or 'V'")
    policy = policy or TruncationPolicy()
    gam, C = gain.Gamma, gain.C
    i = np.arange(max(4 * policy.n_cap, 64))
    if gam == 0.0:
        p_pairs = (i == 0).astype(float)
    else:
        # P(i) = (i+1) Gamma^(2i) / C^4, a negative binomial in i
        p_pairs = np.exp(np.log1p(i) + 2 * i * math.log(gam) - 4 * math.log(C))
    # the pole mode holds i+1 photons, so pairs stop one short of the cap
    pair_policy = TruncationPolicy(policy.epsilon_tail, max(policy.n_cap - 1, 1))
    n_pairs, tail = pair_policy.cutoff(p_pairs)
    n_max = n_pairs + 1
    b = np.sqrt(p_pairs[: n_pairs + 1])  # amplitudes are real and positive
    c = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    idx = np.arange(n_pairs + 1)
    if pole == "H":
        c[idx + 1, idx] = b
    else:
        c[idx, idx + 1] = b
    return TwoModePureState(normalize(c), ModeBasis.hv(), tail)


def qiopa_equatorial_state(
    gain: GainSetting, phi: float, policy: TruncationPolicy | None = None
) -> TwoModePureState:
    """Amplified equatorial photon in its own ``(pi_phi, pi_phi_perp)`` basis.

    Amplitude on ``|2i+1, 2j>`` is ``C^-2 (e^{-i phi} Gamma/2)^i (-e^{i phi} Gamma/2)^j
    sqrt((2i+1)!) sqrt((2j)!) / (i! j!)``, which factorizes into a squeezed single
    photon in the first mode and a squeezed vacuum in the second.
    """
    policy = policy or TruncationPolicy()
    first, second = equatorial_factors(gain, phi, policy)
    state = tensor_product(first, second)
    return TwoModePureState(state.amplitudes, ModeBasis.equatorial(phi), state.tail_mass)


def equatorial_factors(
    gain: GainSetting, phi: float, policy: TruncationPolicy | None = None
) -> tuple[SingleModePureState, SingleModePureState]:
    """The two single-mode factors of the amplified equatorial photon, on a common cutoff."""
    n_max = _common_cutoff(gain, policy or TruncationPolicy())
    one = squeezed_state(gain.g, -phi, 1, n_max=n_max)
    vac = squeezed_state(gain.g, math.pi + phi, 0, n_max=n_max)
    return one, vac


def _chain_generator(g: float, start: tuple[int, int], length: int) -> np.ndarray:
    """``g (a_H^dag a_V^dag - a_H a_V)`` on the ladder ``|m0+k, n0+k>``, k < length."""
    m0, n0 = start
    k = np.arange(length - 1)
    up = g * np.sqrt((m0 + k + 1.0) * (n0 + k + 1.0))  # <k+1| a^dag b^dag |k>
    gen = np.zeros((length, length))
    gen[k + 1, k] = up
    gen[k, k + 1] = -up
    return gen


def qiopa_numeric_evolution(
    gain: GainSetting,
    injected: tuple[complex, complex],
    n_max: int | None = None,
    *,
    guard: int = 2,
    policy: TruncationPolicy | None = None,
    norm_tol: float = 1e-8,
) -> TwoModePureState:
    """Brute-force ``exp[g(a_H^dag a_V^dag - a_H a_V)]`` acting on an injected single photon.

    The generator conserves ``n_H - n_V``, so each ladder ``|m0+k, n0+k>`` is
    exponentiated on its own with ``guard * n_max`` rungs before cropping to
    ``n_max``. The result is in the HV basis.

    Raises:
        TruncationError: if cropping to ``n_max`` discards more than ``norm_tol``.
    """
    c_h, c_v = injected
    if abs(abs(c_h) ** 2 + abs(c_v) ** 2 - 1.0) > 1e-12:
        raise ValueError("injected qubit must be normalized")
    if n_max is None:
        policy = policy or TruncationPolicy()
        n_max = _squeezed_cutoff(gain.g, 1, policy)[0] + 1
    big = guard * n_max
    out = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for coeff, start in ((c_h, (1, 0)), (c_v, (0, 1))):
        if coeff == 0:
            continue
        prop = scipy.linalg.expm(_chain_generator(gain.g, start, big + 1))
        amps = coeff * prop[:, 0]
        k = np.arange(n_max + 1 - max(start))
        out[start[0] + k, start[1] + k] += amps[k]
    lost = 1.0 - float(np.vdot(out, out).real)
    if lost > norm_tol:
        raise TruncationError(f"n_max={n_max} crops {lost:.3g} of the evolved state")
    return TwoModePureState(normalize(out), ModeBasis.hv(), max(lost, 0.0))


def qiopa_macrostate_pm(
    gain: GainSetting, which: str, policy: TruncationPolicy | None = None
) -> TwoModePureState:
    """Amplified ``pi_+`` or ``pi_-`` photon in the ``(pi_+, pi_-)`` basis.

    In that basis the amplifier is a pair of independent squeezers with phases
    0 and pi; the injected photon sits in the first mode for ``"+"`` and in
    the second for ``"-"``.
    """
    state = tensor_product(*macro_factors(gain, which, policy))
    return TwoModePureState(state.amplitudes, PLUS_MINUS, state.tail_mass)


def macro_factors(
    gain: GainSetting, which: str, policy: TruncationPolicy | None = None
) -> tuple[SingleModePureState, SingleModePureState]:
    """Single-mode factors of :func:`qiopa_macrostate_pm` as ``(mode +, mode -)``."""
    if which not in ("+", "-"):
        raise ValueError("which must be '+' or '-'")
    n_max = _common_cutoff(gain, policy or TruncationPolicy())
    photon_first = 1 if which == "+" else 0
    return (
        squeezed_state(gain.g, 0.0, photon_first, n_max=n_max),
        squeezed_state(gain.g, math.pi, 1 - photon_first, n_max=n_max),
    )


def macro_superposition(
    gain: GainSetting, sign: int = +1, policy: TruncationPolicy | None = None
) -> TwoModePureState:
    """``(|Phi+> + sign * i |Phi->)/sqrt(2)`` in the ``(pi_+, pi_-)`` basis.

    By linearity of the amplifier this is the amplified circular photon
    ``(|1_+> + sign * i |1_->)/sqrt(2)``; with the mode conventions here
    ``sign=+1`` is left-circular and ``sign=-1`` right-circular.
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    plus = qiopa_macrostate_pm(gain, "+", policy)
    minus = qiopa_macrostate_pm(gain, "-", policy)
    amps = normalize(np.asarray(plus.amplitudes) + sign * 1j * np.asarray(minus.amplitudes))
    return TwoModePureState(amps, PLUS_MINUS, plus.tail_mass + minus.tail_mass)
