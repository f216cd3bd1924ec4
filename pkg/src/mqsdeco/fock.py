"""Truncated Fock-space states for one and two bosonic modes.

States are immutable containers around dense numpy arrays. Two-mode
objects index photon numbers as ``(m, n)`` with ``m`` counting photons in the
first mode of their :class:`ModeBasis`; flattened two-mode density matrices
use ``index = m * (n_max + 1) + n``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
import scipy.linalg

from .errors import DegenerateStateError, InvalidStateError, TruncationError

NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
# Eigenvalue checks at construction are skipped above this dimension.
PSD_CHECK_MAX_DIM = 512


@dataclass(frozen=True)
class TruncationPolicy:
    """How far a Fock expansion is carried.

    Attributes:
        epsilon_tail: Largest probability mass allowed beyond the cutoff.
        n_cap: Hard ceiling on the per-mode photon-number cutoff.
    """

    epsilon_tail: float = 1e-12
    n_cap: int = 256

    def __post_init__(self):
        if not 0.0 < self.epsilon_tail < 1.0:
            raise ValueError(f"epsilon_tail must lie in (0, 1), got {self.epsilon_tail}")
        if int(self.n_cap) != self.n_cap or self.n_cap < 1:
            raise ValueError(f"n_cap must be a positive integer, got {self.n_cap}")

    def cutoff(self, probabilities: np.ndarray, *, strict: bool = False) -> tuple[int, float]:
        """Pick the smallest cutoff whose tail mass is below ``epsilon_tail``.

        ``probabilities`` must hold the photon-number distribution up to at
        least ``n_cap`` and sum to one analytically. Returns ``(n_max, tail)``.
        When the cap is reached the tail is returned as is, unless ``strict``.
        """
        p = np.asarray(probabilities, dtype=float)
        # tail[n] = mass strictly above n
        tail = np.clip(1.0 - np.cumsum(p), 0.0, None)
        ok = np.nonzero(tail[: self.n_cap + 1] <= self.epsilon_tail)[0]
        if ok.size:
            n = int(ok[0])
            return n, float(tail[n])
        n = min(self.n_cap, p.size - 1)
        if strict:
            raise TruncationError(
                f"tail mass {tail[n]:.3g} at n_cap={self.n_cap} exceeds "
                f"epsilon_tail={self.epsilon_tail:.3g}"
            )
        return n, float(tail[n])


@dataclass(frozen=True)
class ModeBasis:
    """A pair of orthogonal polarization modes.

    ``kind`` is ``"HV"``, ``"equatorial"`` or ``"RL"``. For an equatorial
    basis the first mode is ``(H + e^{i phi} V)/sqrt(2)`` and the second is
    ``(e^{-i phi} H - V)/sqrt(2)``; the phase on the orthogonal mode makes the
    amplifier Hamiltonian read ``e^{-i phi}(a_phi^2 - e^{2 i phi} a_perp^2)/2``.
    ``RL`` is the equatorial basis at ``phi = pi/2``.
    """

    kind: str = "HV"
    phi: float = 0.0

    def __post_init__(self):
        if self.kind not in ("HV", "equatorial", "RL"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.kind == "RL":
            object.__setattr__(self, "phi", math.pi / 2)
        elif self.kind == "HV":
            object.__setattr__(self, "phi", 0.0)
        else:
            object.__setattr__(self, "phi", float(self.phi) % (2 * math.pi))

    @classmethod
    def hv(cls) -> "ModeBasis":
        return cls("HV")

    @classmethod
    def equatorial(cls, phi: float) -> "ModeBasis":
        return cls("equatorial", phi)

    @classmethod
    def rl(cls) -> "ModeBasis":
        return cls("RL")

    def mode_matrix(self) -> np.ndarray:
        """Rows give the basis creation operators in terms of ``(a_H^dag, a_V^dag)``."""
        if self.kind == "HV":
            return np.eye(2, dtype=complex)
        e = np.exp(1j * self.phi)
        return np.array([[1.0, e], [np.conj(e), -1.0]], dtype=complex) / math.sqrt(2)

    @property
    def label(self) -> str:
        if self.kind == "equatorial":
            return f"equatorial({self.phi!r})"
        return self.kind

    @classmethod
    def from_label(cls, label: str) -> "ModeBasis":
        if label.startswith("equatorial(") and label.endswith(")"):
            return cls.equatorial(float(label[len("equatorial(") : -1]))
        return cls(label)


def _frozen(a, dtype=complex) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _check_density(matrix: np.ndarray):
    if not np.allclose(matrix, matrix.conj().T, rtol=0.0, atol=HERMITIAN_TOL):
        raise InvalidStateError("density matrix is not Hermitian")
    tr = np.trace(matrix).real
    if abs(tr - 1.0) > NORM_TOL:
        raise InvalidStateError(f"density matrix has trace {tr!r}")
    if matrix.shape[0] <= PSD_CHECK_MAX_DIM:
        lo = scipy.linalg.eigvalsh(matrix)[0]
        if lo < -PSD_TOL:
            raise InvalidStateError(f"density matrix has eigenvalue {lo:.3g}")


@dataclass(frozen=True)
class SingleModePureState:
    """State vector ``c_n`` for ``n = 0..n_max``.

    ``tail_mass`` is the probability estimated to lie beyond the cutoff.
    """

    amplitudes: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 1 or amps.size == 0:
            raise InvalidStateError("single-mode amplitudes must be a non-empty vector")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise InvalidStateError(f"state has squared norm {norm2!r}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_max(self) -> int:
        return self.amplitudes.size - 1

    def density(self) -> "SingleModeDensity":
        v = self.amplitudes
        return SingleModeDensity(np.outer(v, v.conj()), tail_mass=self.tail_mass)


@dataclass(frozen=True)
class SingleModeDensity:
    matrix: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidStateError("density matrix must be square")
        _check_density(m)
        object.__setattr__(self, "matrix", m)

    @property
    def n_max(self) -> int:
        return self.matrix.shape[0] - 1


@dataclass(frozen=True)
class TwoModePureState:
    """Amplitudes ``c[m, n]`` over a square ``(n_max+1, n_max+1)`` grid."""

    amplitudes: np.ndarray
    basis: ModeBasis = field(default_factory=ModeBasis.hv)
    tail_mass: float = 0.0

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 2 or amps.shape[0] != amps.shape[1]:
            raise InvalidStateError("two-mode amplitudes must be a square array")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise InvalidStateError(f"state has squared norm {norm2!r}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_max(self) -> int:
        return self.amplitudes.shape[0] - 1

    @property
    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def density(self) -> "TwoModeDensity":
        v = self.vector
        return TwoModeDensity(np.outer(v, v.conj()), self.basis, tail_mass=self.tail_mass)


@dataclass(frozen=True)
class TwoModeDensity:
    """Density matrix over flattened ``(m, n)`` pairs."""

    matrix: np.ndarray
    basis: ModeBasis = field(default_factory=ModeBasis.hv)
    tail_mass: float = 0.0

    def __post_init__(self):
        m = _frozen(self.matrix)
        d = math.isqrt(m.shape[0])
        if m.ndim != 2 or m.shape[0] != m.shape[1] or d * d != m.shape[0]:
            raise InvalidStateError("two-mode density must be square with (n_max+1)^2 rows")
        _check_density(m)
        object.__setattr__(self, "matrix", m)

    @property
    def n_max(self) -> int:
        return math.isqrt(self.matrix.shape[0]) - 1

    def tensor(self) -> np.ndarray:
        """The matrix as a ``rho[m, n, m', n']`` array."""
        d = self.n_max + 1
        return self.matrix.reshape(d, d, d, d)


@dataclass(frozen=True)
class PhotonDistribution:
    """Photon-number probabilities, ``P[n]`` or joint ``P[m, n]``."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = _frozen(self.probabilities, dtype=float)
        if p.ndim not in (1, 2):
            raise InvalidStateError("distribution must be one- or two-dimensional")
        if np.any(p < 0):
            raise InvalidStateError("negative probability")
        if abs(p.sum() - 1.0) > NORM_TOL:
            raise InvalidStateError(f"distribution sums to {p.sum()!r}")
        object.__setattr__(self, "probabilities", p)

    @property
    def joint(self) -> bool:
        return self.probabilities.ndim == 2

    def mean(self) -> float:
        p = self.probabilities
        if p.ndim == 1:
            return float(np.arange(p.size) @ p)
        idx = np.arange(p.shape[0])
        return float(idx @ p.sum(axis=1) + idx @ p.sum(axis=0))

    def total_number(self) -> np.ndarray:
        """Distribution of ``m + n`` for a joint distribution."""
        p = self.probabilities
        if p.ndim == 1:
            return p.copy()
        d = p.shape[0]
        out = np.zeros(2 * d - 1)
        for m in range(d):
            out[m : m + d] += p[m]
        return out


State = Union[SingleModePureState, SingleModeDensity, TwoModePureState, TwoModeDensity]


def normalize(state, *, density: bool = False):
    """Rescale to unit norm (vectors) or unit trace (density matrices).

    Accepts a state object or a raw array. For raw arrays, ``density`` tells
    whether a square 2-d array is a density matrix rather than a two-mode
    amplitude grid.

    Raises:
        DegenerateStateError: if the norm or trace is below 1e-14.
    """
    if isinstance(state, (SingleModePureState, TwoModePureState)):
        amps = normalize(np.asarray(state.amplitudes))
        if isinstance(state, SingleModePureState):
            return SingleModePureState(amps, state.tail_mass)
        return TwoModePureState(amps, state.basis, state.tail_mass)
    if isinstance(state, SingleModeDensity):
        return SingleModeDensity(normalize(np.asarray(state.matrix), density=True), state.tail_mass)
    if isinstance(state, TwoModeDensity):
        return TwoModeDensity(
            normalize(np.asarray(state.matrix), density=True), state.basis, state.tail_mass
        )

    arr = np.asarray(state, dtype=complex)
    if density:
        scale = np.trace(arr).real
    else:
        scale = math.sqrt(float(np.vdot(arr, arr).real))
    if scale <= 1e-14:
        raise DegenerateStateError(f"cannot normalize: norm/trace is {scale:.3g}")
    return arr / scale


def number_distribution(state: State) -> PhotonDistribution:
    """Photon-number distribution: the diagonal of the state in the Fock basis."""
    if isinstance(state, SingleModePureState):
        p = np.abs(state.amplitudes) ** 2
    elif isinstance(state, TwoModePureState):
        p = np.abs(state.amplitudes) ** 2
    elif isinstance(state, SingleModeDensity):
        p = np.diag(state.matrix).real.copy()
    elif isinstance(state, TwoModeDensity):
        d = state.n_max + 1
        p = np.diag(state.matrix).real.reshape(d, d)
    else:
        raise TypeError(f"not a state: {type(state).__name__}")
    # round-off can leave diagonal entries at -1e-17
    return PhotonDistribution(np.clip(p, 0.0, None))


def mean_photon_number(state: Union[State, PhotonDistribution]) -> float:
    """Mean total photon number (summed over both modes for two-mode states)."""
    if isinstance(state, PhotonDistribution):
        return state.mean()
    return number_distribution(state).mean()


def tensor_product(a, b):
    """Product of two single-mode states of the same kind.

    Pure inputs give a :class:`TwoModePureState` with ``c[m, n] = a[m] b[n]``;
    densities give the Kronecker product. The two factors are zero-padded to a
    common cutoff.
    """
    if isinstance(a, SingleModePureState) and isinstance(b, SingleModePureState):
        d = max(a.n_max, b.n_max) + 1
        va = np.pad(a.amplitudes, (0, d - a.amplitudes.size))
        vb = np.pad(b.amplitudes, (0, d - b.amplitudes.size))
        return TwoModePureState(np.outer(va, vb), tail_mass=a.tail_mass + b.tail_mass)
    if isinstance(a, SingleModeDensity) and isinstance(b, SingleModeDensity):
        d = max(a.n_max, b.n_max) + 1
        ma = _pad_square(a.matrix, d)
        mb = _pad_square(b.matrix, d)
        return TwoModeDensity(np.kron(ma, mb), tail_mass=a.tail_mass + b.tail_mass)
    raise TypeError(
        f"tensor_product needs two pure states or two densities, "
        f"got {type(a).__name__} and {type(b).__name__}"
    )


def _pad_square(m: np.ndarray, d: int) -> np.ndarray:
    k = d - m.shape[0]
    return np.pad(m, ((0, k), (0, k)))


def _unitary_log(u: np.ndarray) -> np.ndarray:
    """Hermitian ``h`` with ``expm(1j * h) == u``."""
    t, z = scipy.linalg.schur(u, output="complex")
    theta = np.angle(np.diag(t))
    return (z * theta) @ z.conj().T


def _block_generator(h: np.ndarray, total: int) -> np.ndarray:
    """``h_jk a_j^dag a_k`` restricted to states ``|m, total - m>``."""
    m = np.arange(total + 1)
    g = np.diag(h[0, 0] * m + h[1, 1] * (total - m)).astype(complex)
    hop = np.sqrt((m[:-1] + 1) * (total - m[:-1]))  # <m+1| a1^dag a2 |m>
    g[m[1:], m[:-1]] += h[0, 1] * hop
    g[m[:-1], m[1:]] += h[1, 0] * hop
    return g


def polarization_rotation(
    state: TwoModePureState,
    u: np.ndarray,
    *,
    basis: ModeBasis | None = None,
    leak_tol: float = NORM_TOL,
) -> TwoModePureState:
    """Apply the passive two-mode unitary induced by the 2x2 matrix ``u``.

    A photon in mode ``j`` is sent to ``sum_k u[k, j]`` times mode ``k``.
    Each total-photon-number block is rotated with the exact exponential of
    the generator block, so blocks never mix. Blocks with ``m + n > n_max``
    spill outside the square grid; the spilled probability is added to the
    tail estimate and must stay below ``leak_tol``.

    Raises:
        ValueError: if ``u`` is not unitary within 1e-12.
        TruncationError: if more than ``leak_tol`` probability spills out.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not np.allclose(u.conj().T @ u, np.eye(2), rtol=0, atol=1e-12):
        raise ValueError("u must be a 2x2 unitary")
    h = _unitary_log(u)
    c = np.asarray(state.amplitudes)
    d = state.n_max + 1
    out = np.zeros_like(c)
    spilled = 0.0
    for total in range(2 * d - 1):
        m = np.arange(max(0, total - d + 1), min(total, d - 1) + 1)
        block_in = np.zeros(total + 1, dtype=complex)
        block_in[m] = c[m, total - m]
        if not np.any(block_in):
            continue
        block_out = scipy.linalg.expm(1j * _block_generator(h, total)) @ block_in
        out[m, total - m] = block_out[m]
        spilled += float(np.vdot(block_out, block_out).real) - float(
            np.vdot(block_out[m], block_out[m]).real
        )
    if spilled > leak_tol:
        raise TruncationError(
            f"rotation pushed {spilled:.3g} probability beyond n_max={state.n_max}"
        )
    out = normalize(out)
    return TwoModePureState(out, basis or state.basis, state.tail_mass + spilled)


def basis_change_matrix(source: ModeBasis, target: ModeBasis) -> np.ndarray:
    """Mode matrix converting coordinates in ``source`` to coordinates in ``target``."""
    return target.mode_matrix().conj() @ source.mode_matrix().T


def change_basis(state: TwoModePureState, target: ModeBasis, **kwargs) -> TwoModePureState:
    """Re-express ``state`` in the polarization modes of ``target``."""
    u = basis_change_matrix(state.basis, target)
    return polarization_rotation(state, u, basis=target, **kwargs)


def to_json(state: State) -> str:
    """Serialize as ``{"n_max", "basis", "data"}`` with complex entries as ``[re, im]``."""
    if isinstance(state, (SingleModePureState, TwoModePureState)):
        data = state.amplitudes
    else:
        data = state.matrix
    basis = state.basis.label if isinstance(state, (TwoModePureState, TwoModeDensity)) else None
    kind = type(state).__name__
    payload = {
        "kind": kind,
        "n_max": state.n_max,
        "basis": basis,
        "tail_mass": state.tail_mass,
        "data": np.stack([data.real, data.imag], axis=-1).tolist(),
    }
    return json.dumps(payload)


def from_json(text: str) -> State:
    payload = json.loads(text)
    raw = np.asarray(payload["data"], dtype=float)
    data = raw[..., 0] + 1j * raw[..., 1]
    kind = payload["kind"]
    tail = payload.get("tail_mass", 0.0)
    if kind == "SingleModePureState":
        return SingleModePureState(data, tail)
    if kind == "SingleModeDensity":
        return SingleModeDensity(data, tail)
    basis = ModeBasis.from_label(payload["basis"])
    if kind == "TwoModePureState":
        return TwoModePureState(data, basis, tail)
    if kind == "TwoModeDensity":
        return TwoModeDensity(data, basis, tail)
    raise ValueError(f"unknown state kind {kind!r}")


def fock_state(n: int, n_max: int) -> SingleModePureState:
    v = np.zeros(n_max + 1, dtype=complex)
    v[n] = 1.0
    return SingleModePureState(v)


def two_mode_fock_state(m: int, n: int, n_max: int, basis: ModeBasis | None = None) -> TwoModePureState:
    c = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    c[m, n] = 1.0
    return TwoModePureState(c, basis or ModeBasis.hv())
