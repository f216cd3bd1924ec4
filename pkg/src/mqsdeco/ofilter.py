"""Orthogonality-filter post-selection on the polarization photon-number imbalance."""

from __future__ import annotations

import numpy as np

from .errors import FilterAnnihilationError
from .fock import TwoModeDensity

MIN_SUCCESS = 1e-14


def _check_k(k: int) -> int:
    if int(k) != k or k < 0:
        raise ValueError(f"filter threshold must be a non-negative integer, got {k}")
    return int(k)


def ofilter_mask(k: int, n_max: int) -> np.ndarray:
    """Boolean ``(n_max+1, n_max+1)`` array, true where ``|m - n| > k``."""
    k = _check_k(k)
    idx = np.arange(n_max + 1)
    return np.abs(idx[:, None] - idx[None, :]) > k


def apply_ofilter(rho: TwoModeDensity, k: int) -> tuple[TwoModeDensity, float]:
    """Project onto the accepted outcomes and renormalize.

    ``rho`` must be expressed in the basis where the filter counts photons.
    Returns the conditional state and the success probability ``Tr(P rho P)``.

    Raises:
        FilterAnnihilationError: if the success probability is at most 1e-14.
    """
    keep = ofilter_mask(k, rho.n_max).reshape(-1)
    m = np.asarray(rho.matrix) * np.outer(keep, keep)
    p = float(np.trace(m).real)
    if p <= MIN_SUCCESS:
        raise FilterAnnihilationError(f"filter with k={k} rejects the whole state")
    return TwoModeDensity(m / p, rho.basis, rho.tail_mass), p


def filter_factor(a: np.ndarray, k: int, n_max: int) -> tuple[np.ndarray, float]:
    """Filtered and renormalized version of a factor ``A`` with ``rho = A A^dag``.

    Same conventions as :func:`apply_ofilter`, acting on rows of ``A``.
    """
    keep = ofilter_mask(k, n_max).reshape(-1)
    fa = a * keep[:, None]
    p = float(np.vdot(fa, fa).real)
    if p <= MIN_SUCCESS:
        raise FilterAnnihilationError(f"filter with k={k} rejects the whole state")
    return fa / np.sqrt(p), p
