"""Fidelity, Bures distance and the closed-form coherent-state results."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import InvalidStateError
from .fock import (
    SingleModeDensity,
    SingleModePureState,
    TwoModeDensity,
    TwoModePureState,
)

NEG_EIG_TOL = 1e-10
SUPPORT_TOL = 1e-14
RANK_RTOL = 10.0  # safety factor over the matrix_rank threshold


@dataclass(frozen=True)
class VisibilityResult:
    """One point of a distance curve, with ``x`` the mean number of lost photons."""

    x: float
    distance: float
    fidelity: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0.0 <= self.fidelity <= 1.0 and 0.0 <= self.distance <= 1.0):
            raise ValueError("fidelity and distance must lie in [0, 1]")
        if abs(self.distance - math.sqrt(1.0 - self.fidelity)) > 1e-12:
            raise ValueError("distance must equal sqrt(1 - fidelity)")

    @classmethod
    def from_fidelity(cls, x: float, fidelity: float, **metadata) -> "VisibilityResult":
        return cls(x, bures_from_fidelity(fidelity), fidelity, metadata)


def _eigh_psd(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = np.asarray(m)
    if not np.allclose(m, m.conj().T, rtol=0.0, atol=1e-12):
        raise InvalidStateError("matrix is not Hermitian")
    w, v = scipy.linalg.eigh(m)
    top = max(abs(w[-1]), abs(w[0]), np.finfo(float).tiny)
    if w[0] < -NEG_EIG_TOL * top:
        raise InvalidStateError(f"matrix has eigenvalue {w[0]:.3g}, not positive semidefinite")
    return np.clip(w, 0.0, None), v


def matrix_sqrt_psd(m: np.ndarray) -> np.ndarray:
    """Spectral square root of a Hermitian positive-semidefinite matrix.

    Negative eigenvalues down to ``-1e-10 * lambda_max`` are treated as
    round-off and clamped to zero; anything lower raises.
    """
    w, v = _eigh_psd(m)
    return (v * np.sqrt(w)) @ v.conj().T


def surviving_indices(norms: np.ndarray, budget: float) -> np.ndarray:
    """Indices kept after discarding the smallest norms whose sum fits in ``budget``.

    For factors ``rho = A A^dag`` and ``sigma = B B^dag``, dropping columns of
    total norm ``e`` moves ``fidelity_from_factors`` by at most ``e``.
    """
    norms = np.asarray(norms)
    order = np.argsort(norms, kind="stable")
    n_drop = int(np.searchsorted(np.cumsum(norms[order]), budget, side="right"))
    return np.sort(order[n_drop:])


def drop_small_columns(cols: np.ndarray, budget: float) -> np.ndarray:
    return cols[:, surviving_indices(np.linalg.norm(cols, axis=0), budget)]


def kron_factor(fa: np.ndarray, fb: np.ndarray, drop_budget: float = 0.0) -> np.ndarray:
    """Factor of ``(fa fa^dag) x (fb fb^dag)`` without forming the negligible columns."""
    norms = np.outer(np.linalg.norm(fa, axis=0), np.linalg.norm(fb, axis=0))
    keep = surviving_indices(norms.reshape(-1), drop_budget)
    i, j = np.divmod(keep, fb.shape[1])
    cols = fa[:, i][:, None, :] * fb[:, j][None, :, :]
    return cols.reshape(fa.shape[0] * fb.shape[0], keep.size)


def psd_factor(m: np.ndarray, drop_budget: float = 0.0) -> np.ndarray:
    """``A`` with ``A @ A^dag == m``, built from the eigenvectors.

    Columns ``sqrt(lambda) v`` are discarded smallest first while the sum of
    their norms fits in ``drop_budget``.
    """
    w, v = _eigh_psd(m)
    a = v * np.sqrt(w)
    return drop_small_columns(a, drop_budget) if drop_budget > 0 else a[:, w > 0]


def _matrix(state) -> np.ndarray:
    if isinstance(state, (SingleModeDensity, TwoModeDensity)):
        return np.asarray(state.matrix)
    if isinstance(state, (SingleModePureState, TwoModePureState)):
        v = np.asarray(state.amplitudes).reshape(-1)
        return np.outer(v, v.conj())
    m = np.asarray(state)
    if m.ndim == 1:
        return np.outer(m, m.conj())
    return m


def _is_pure(state) -> bool:
    return isinstance(state, (SingleModePureState, TwoModePureState)) or (
        isinstance(state, np.ndarray) and state.ndim == 1
    )


def _clip_unit(f: float) -> float:
    return min(max(float(f), 0.0), 1.0)


def numerical_range_factor(m: np.ndarray) -> np.ndarray:
    """Eigen-factor ``A`` of ``m`` keeping only eigenvalues the solver can resolve.

    Eigenvalues below ``10 d eps lambda_max`` (ten times the
    ``numpy.linalg.matrix_rank`` threshold) are round-off and are set to zero rather than square-rooted,
    which would turn 1e-17 of noise into 3e-9 of fidelity.
    """
    w, v = _eigh_psd(m)
    keep = w > RANK_RTOL * m.shape[0] * np.finfo(float).eps * w[-1]
    return v[:, keep] * np.sqrt(w[keep])


def fidelity(rho, sigma, *, restrict_support: bool = True) -> float:
    """``Tr sqrt(sqrt(rho) sigma sqrt(rho))``, not squared.

    Pure-state inputs reduce to ``|<psi|phi>|``. Mixed inputs are factored as
    ``rho = A A^dag`` and ``sigma = B B^dag`` with :func:`numerical_range_factor`
    and the fidelity is the nuclear norm of ``A^dag B``. With
    ``restrict_support`` the computation is confined to basis indices carrying
    weight in either matrix.
    """
    if _is_pure(rho) and _is_pure(sigma):
        a = np.asarray(getattr(rho, "amplitudes", rho)).reshape(-1)
        b = np.asarray(getattr(sigma, "amplitudes", sigma)).reshape(-1)
        if a.shape != b.shape:
            raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
        return _clip_unit(abs(np.vdot(a, b)))
    r = _matrix(rho)
    s = _matrix(sigma)
    if r.shape != s.shape:
        raise ValueError(f"shape mismatch: {r.shape} vs {s.shape}")
    if restrict_support:
        mass = np.maximum(np.abs(r).sum(axis=1), np.abs(s).sum(axis=1))
        keep = np.nonzero(mass > SUPPORT_TOL)[0]
        r = r[np.ix_(keep, keep)]
        s = s[np.ix_(keep, keep)]
    return fidelity_from_factors(numerical_range_factor(r), numerical_range_factor(s))


def fidelity_from_factors(a: np.ndarray, b: np.ndarray) -> float:
    """Fidelity of ``a a^dag`` and ``b b^dag``: the nuclear norm of ``a^dag b``."""
    return _clip_unit(scipy.linalg.svdvals(a.conj().T @ b).sum())


def bures_from_fidelity(f: float) -> float:
    return math.sqrt(max(0.0, 1.0 - f))


def bures_distance(rho, sigma, **kwargs) -> float:
    """``sqrt(1 - F)``: 0 for identical states, 1 for orthogonal supports."""
    return bures_from_fidelity(fidelity(rho, sigma, **kwargs))


def universal_visibility(x):
    """Cat-state visibility as a function of the mean number of lost photons.

    ``D(x) = sqrt(1 - sqrt(1 - exp(-4x)))``, evaluated stably for large x.
    """
    x = np.asarray(x, dtype=float)
    e = np.exp(-4.0 * x)
    # 1 - sqrt(1 - e) = e / (1 + sqrt(1 - e))
    out = np.sqrt(e / (1.0 + np.sqrt(1.0 - e)))
    return float(out) if out.ndim == 0 else out


def universal_visibility_slope(x):
    """``|dD/dx|`` of :func:`universal_visibility`; tends to ``sqrt(2) e^{-2x}``."""
    x = np.asarray(x, dtype=float)
    e = np.exp(-4.0 * x)
    s = np.sqrt(1.0 - e)
    out = e / (s * universal_visibility(x))
    return float(out) if np.ndim(out) == 0 else out


def cat_visibility_closed_form(alpha: float, phi: float, R: float) -> float:
    """Distance between the two lossy cats ``|psi_phi^+>`` and ``|psi_phi^->``.

    Large-amplitude result; depends on the inputs only through
    ``x = R |alpha|^2 sin^2 phi``.
    """
    return universal_visibility(R * alpha**2 * math.sin(phi) ** 2)


def coherent_distinguishability_closed_form(alpha: float, phi: float, T: float) -> float:
    """``sqrt(1 - exp(-2 T |alpha|^2 sin^2 phi))`` for ``|alpha e^{+-i phi}>`` after loss."""
    return math.sqrt(-math.expm1(-2.0 * T * alpha**2 * math.sin(phi) ** 2))


def product_fidelity_fast_path(a1, b1, a2, b2) -> float:
    """``F(a1 x b1, a2 x b2) = F(a1, a2) F(b1, b2)`` for single-mode densities."""
    return fidelity(a1, a2) * fidelity(b1, b2)
