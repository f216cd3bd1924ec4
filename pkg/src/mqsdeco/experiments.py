"""Parameter sweeps producing visibility curves and photon-number tables as CSV rows.

Each ``run_*`` function returns plain row dictionaries keyed by the CSV
header of that table, in grid order. :func:`write_csv` renders them with
shortest round-trip float formatting, so identical inputs give identical
bytes.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import OracleMismatchError, TruncationError
from .fock import TruncationPolicy, mean_photon_number, number_distribution
from .generators import (
    CatParams,
    GainSetting,
    cat_state,
    macro_factors,
    qiopa_equatorial_state,
    qiopa_pole_state,
)
from .loss import LossSetting, binomial_thinning, kraus_branches
from .metrics import (
    bures_from_fidelity,
    cat_visibility_closed_form,
    fidelity_from_factors,
    kron_factor,
    psd_factor,
)
from .ofilter import filter_factor

HEADERS = {
    "universal-curve": ["x", "R", "alpha", "phi", "D_closed", "D_numeric"],
    "qiopa-vis": ["g", "R", "x", "F", "D", "mean_n"],
    "ofilter-vis": ["g", "k", "R", "x", "F", "D", "success_prob"],
    "distribution": ["label", "index_m", "index_n", "probability"],
}

FAMILIES = ("cat", "qiopa", "qiopa_filtered")
BRANCH_DROP = 1e-13


@dataclass
class SweepConfig:
    """Inputs of one sweep.

    ``R`` is the reflectivity grid; the plotted coordinate x is derived from it
    per row. ``seed`` is only consumed by randomized checks, never by the
    sweeps themselves.
    """

    family: str = "cat"
    R: Sequence[float] = (0.0,)
    alpha: float = 3.0
    phi: float = math.pi / 2
    g: Sequence[float] = (0.8,)
    k: Sequence[int] = (0,)
    truncation: TruncationPolicy = field(default_factory=TruncationPolicy)
    out: str | None = None
    seed: int = 0
    oracle_tol: float = 1e-6
    workers: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        self.R = [float(r) for r in self.R]
        if not self.R:
            raise ValueError("reflectivity grid is empty")
        bad = [r for r in self.R if not 0.0 <= r <= 1.0]
        if bad:
            raise ValueError(f"reflectivities outside [0, 1]: {bad}")
        self.g = [float(v) for v in self.g]
        if any(v < 0 for v in self.g):
            raise ValueError("gains must be non-negative")
        self.k = [int(v) for v in self.k]
        if any(v < 0 for v in self.k):
            raise ValueError("filter thresholds must be non-negative")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def _map(fn: Callable, items: Iterable, workers: int) -> list:
    # executor.map keeps input order regardless of completion order
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def check_feasible(mean_n: float, policy: TruncationPolicy):
    """Refuse photon numbers whose bulk would not fit under the cutoff ceiling."""
    need = mean_n + 8.0 * math.sqrt(mean_n)
    if need > policy.n_cap:
        raise TruncationError(
            f"mean photon number {mean_n:.4g} needs about {need:.0f} levels, "
            f"more than n_cap={policy.n_cap}"
        )


def cat_pair_visibility(
    alpha: float, phi: float, R: float, policy: TruncationPolicy | None = None
) -> tuple[float, float]:
    """Fidelity and distance of the lossy cat pair ``sign = +1`` vs ``sign = -1``, fully numeric."""
    policy = policy or TruncationPolicy()
    # exact branch factors keep 1 - F resolved down to ~1e-13, no eigensolve needed
    loss = LossSetting.from_reflectivity(R)
    plus = kraus_branches(cat_state(CatParams(alpha, phi, +1), policy), loss, drop_budget=BRANCH_DROP)
    minus = kraus_branches(cat_state(CatParams(alpha, phi, -1), policy), loss, drop_budget=BRANCH_DROP)
    f = fidelity_from_factors(plus, minus)
    return f, bures_from_fidelity(f)


def run_universal_curve(config: SweepConfig) -> list[dict]:
    """Cat-pair visibility along the R grid, closed form next to the full numeric pipeline.

    Raises:
        OracleMismatchError: if the two columns differ by more than ``config.oracle_tol``.
    """
    if config.family != "cat":
        raise ValueError("universal curve needs the 'cat' family")
    check_feasible(config.alpha**2, config.truncation)
    scale = config.alpha**2 * math.sin(config.phi) ** 2

    def row(R):
        _, d_num = cat_pair_visibility(config.alpha, config.phi, R, config.truncation)
        d_closed = cat_visibility_closed_form(config.alpha, config.phi, R)
        return {
            "x": R * scale,
            "R": R,
            "alpha": config.alpha,
            "phi": config.phi,
            "D_closed": d_closed,
            "D_numeric": d_num,
        }

    rows = _map(row, config.R, config.workers)
    worst = max(rows, key=lambda r: abs(r["D_closed"] - r["D_numeric"]))
    gap = abs(worst["D_closed"] - worst["D_numeric"])
    if gap > config.oracle_tol:
        raise OracleMismatchError(
            f"closed form and numeric visibility differ by {gap:.3g} at R={worst['R']} "
            f"(tolerance {config.oracle_tol:.3g})"
        )
    return rows


def run_cat_distributions(
    alpha: float,
    R_values: Sequence[float],
    phi: float = math.pi / 2,
    policy: TruncationPolicy | None = None,
) -> list[dict]:
    """Photon-number distribution of the lossy even cat for each reflectivity."""
    policy = policy or TruncationPolicy()
    check_feasible(alpha**2, policy)
    dist = number_distribution(cat_state(CatParams(alpha, phi, +1), policy))
    rows = []
    for R in R_values:
        p = binomial_thinning(dist, LossSetting.from_reflectivity(R)).probabilities
        label = f"R={R!r}"
        rows.extend(
            {"label": label, "index_m": n, "index_n": "", "probability": float(p[n])}
            for n in range(p.size)
        )
    return rows


def run_qiopa_distributions(
    g: float,
    T_values: Sequence[float],
    basis: str = "equatorial",
    phi: float = 0.0,
    policy: TruncationPolicy | None = None,
) -> list[dict]:
    """Joint photon-number distributions of an amplified qubit after loss.

    ``basis="equatorial"`` uses the amplified equatorial photon in its own
    basis, ``"HV"`` the amplified H photon. Zero-probability cells are omitted.
    """
    policy = policy or TruncationPolicy()
    gain = GainSetting(g)
    check_feasible(gain.mean_photons, policy)
    if basis == "equatorial":
        state = qiopa_equatorial_state(gain, phi, policy)
    elif basis == "HV":
        state = qiopa_pole_state(gain, "H", policy)
    else:
        raise ValueError(f"basis must be 'equatorial' or 'HV', got {basis!r}")
    dist = number_distribution(state)
    rows = []
    for T in T_values:
        p = binomial_thinning(dist, LossSetting(T)).probabilities
        label = f"T={T!r}"
        for m, n in zip(*np.nonzero(p > 0)):
            rows.append(
                {"label": label, "index_m": int(m), "index_n": int(n), "probability": float(p[m, n])}
            )
    return rows


def _lossy_branches(gain: GainSetting, which: str, loss: LossSetting, policy, drop_budget=BRANCH_DROP):
    return [kraus_branches(s, loss, drop_budget=drop_budget) for s in macro_factors(gain, which, policy)]


def qiopa_pair_fidelity(gain: GainSetting, R: float, policy: TruncationPolicy | None = None) -> float:
    """Fidelity of the two lossy orthogonal equatorial macrostates via the product fast path."""
    loss = LossSetting.from_reflectivity(R)
    a1, b1 = _lossy_branches(gain, "+", loss, policy)
    a2, b2 = _lossy_branches(gain, "-", loss, policy)
    return fidelity_from_factors(a1, a2) * fidelity_from_factors(b1, b2)


def run_qiopa_visibility(
    g_values: Sequence[float],
    R_values: Sequence[float],
    policy: TruncationPolicy | None = None,
    workers: int = 1,
) -> list[dict]:
    """Distance between the lossy macrostates of each gain along the R grid."""
    policy = policy or TruncationPolicy()
    rows = []
    for g in g_values:
        gain = GainSetting(g)
        check_feasible(gain.mean_photons, policy)
        mean_n = sum(mean_photon_number(s) for s in macro_factors(gain, "+", policy))

        def row(R, gain=gain, mean_n=mean_n):
            f = qiopa_pair_fidelity(gain, R, policy)
            return {"g": gain.g, "R": R, "x": R * mean_n, "F": f, "D": bures_from_fidelity(f), "mean_n": mean_n}

        rows.extend(_map(row, R_values, workers))
    return rows


def lossy_product_factor(gain: GainSetting, which: str, loss: LossSetting, policy, drop_budget: float):
    """Factor ``A`` of the lossy two-mode macrostate with ``rho = A A^dag``, plus the cutoff."""
    # Eigen-columns concentrate weight better than Kraus branches, so far
    # fewer product columns survive the drop budget.
    a, b = (psd_factor(branch @ branch.conj().T) for branch in _lossy_branches(gain, which, loss, policy, 0.0))
    return kron_factor(a, b, drop_budget), a.shape[0] - 1


def filtered_pair(gain: GainSetting, R: float, k: int, policy=None, drop_budget: float = 1e-9):
    """Fidelity and success probability of the filtered lossy macrostate pair.

    The filter acts after the loss, in the ``(pi_+, pi_-)`` basis, on both states.
    """
    loss = LossSetting.from_reflectivity(R)
    a, n_max = lossy_product_factor(gain, "+", loss, policy, drop_budget)
    b, _ = lossy_product_factor(gain, "-", loss, policy, drop_budget)
    fa, p = filter_factor(a, k, n_max)
    fb, _ = filter_factor(b, k, n_max)
    return fidelity_from_factors(fa, fb), p


def run_ofilter_visibility(
    g: float,
    k_values: Sequence[int],
    R_values: Sequence[float],
    policy: TruncationPolicy | None = None,
    drop_budget: float = 1e-9,
) -> list[dict]:
    """Filtered visibility and success probability for each threshold along the R grid."""
    policy = policy or TruncationPolicy()
    gain = GainSetting(g)
    check_feasible(gain.mean_photons, policy)
    mean_n = sum(mean_photon_number(s) for s in macro_factors(gain, "+", policy))
    rows = []
    for k in k_values:
        for R in R_values:
            f, p = filtered_pair(gain, R, k, policy, drop_budget)
            rows.append(
                {"g": g, "k": k, "R": R, "x": R * mean_n, "F": f, "D": bures_from_fidelity(f), "success_prob": p}
            )
    return rows


def slope_diagnostics(x: Sequence[float], d: Sequence[float]) -> dict:
    """Slopes and inflection points of a sampled curve ``d(x)``.

    Reports the central-difference slope at the second-largest x, the secant
    slope over the last 5% of the x range, the central slope nearest the
    middle of the range, and every sign change of the second divided
    difference.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    if x.size < 5 or x.size != d.size:
        raise ValueError("slope diagnostics need at least five (x, D) points")
    order = np.argsort(x)
    x, d = x[order], d[order]
    if np.any(np.diff(x) <= 0):
        raise ValueError("slope diagnostics need distinct x values")
    span = x[-1] - x[0]

    def central(i):
        return abs((d[i + 1] - d[i - 1]) / (x[i + 1] - x[i - 1]))

    tail_start = np.searchsorted(x, x[-1] - 0.05 * span, side="left")
    tail_start = min(tail_start, x.size - 2)
    tail_slope = abs((d[-1] - d[tail_start]) / (x[-1] - x[tail_start]))
    mid = int(np.clip(np.argmin(np.abs(x - (x[0] + 0.5 * span))), 1, x.size - 2))

    slopes = np.diff(d) / np.diff(x)
    second = np.diff(slopes) / (0.5 * (x[2:] - x[:-2]))
    flips = np.nonzero(np.sign(second[:-1]) * np.sign(second[1:]) < 0)[0]
    inflections = []
    for i in flips:
        # between interior points i+1 and i+2; interpolate the zero of the second difference
        xa, xb = x[i + 1], x[i + 2]
        sa, sb = second[i], second[i + 1]
        xi = xa + (xb - xa) * sa / (sa - sb)
        inflections.append({"x": float(xi), "D": float(np.interp(xi, x, d))})
    return {
        "n_points": int(x.size),
        "endpoint_slope": float(central(x.size - 2)),
        "tail_slope": float(tail_slope),
        "midrange_slope": float(central(mid)),
        "inflections": inflections,
    }


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows: Sequence[dict], header: Sequence[str], path: str | None = None) -> str:
    """Render rows with a fixed header; also writes to ``path`` when given."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row[h]) for h in header])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


GROUP_COLUMNS = ("g", "k", "alpha", "phi")


def read_curves_csv(path: str, x_column: str = "x", d_column: str = "D") -> list[tuple[dict, list, list]]:
    """Split a sweep CSV into curves, one per distinct value of its parameter columns.

    Returns ``(group, x, d)`` triples in order of first appearance, where
    ``group`` maps each present column of ``GROUP_COLUMNS`` to its value.
    """
    curves: dict[tuple, tuple[dict, list, list]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {x_column, d_column} <= set(reader.fieldnames):
            raise KeyError(f"need columns {x_column!r} and {d_column!r}")
        keys = [c for c in GROUP_COLUMNS if c in reader.fieldnames]
        for r in reader:
            group = {c: float(r[c]) for c in keys}
            entry = curves.setdefault(tuple(group.values()), (group, [], []))
            entry[1].append(float(r[x_column]))
            entry[2].append(float(r[d_column]))
    return list(curves.values())
