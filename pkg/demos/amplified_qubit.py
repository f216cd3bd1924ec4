"""Amplifying a single polarization photon.

A phase-covariant parametric amplifier turns one photon into a
macrostate with ``1 + 4 sinh(g)^2`` photons on average. The closed-form
amplitudes are checked against brute-force evolution under the
collinear Hamiltonian, and the photon-number statistics are shown before
and after loss.
"""

import math

import numpy as np

from mqsdeco import (
    GainSetting,
    LossSetting,
    binomial_thinning,
    change_basis,
    fidelity,
    mean_photon_number,
    number_distribution,
    qiopa_equatorial_state,
    qiopa_numeric_evolution,
    qiopa_pole_state,
)

for g in (0.8, 1.1, 1.3, 1.5):
    gain = GainSetting(g)
    print(f"g={g}: <n> = {mean_photon_number(qiopa_pole_state(gain)):.4f}  (1 + 4 sinh^2 g = {gain.mean_photons:.4f})")

gain = GainSetting(0.8)
pole = qiopa_pole_state(gain, "H")
print("\nH photon, closed form vs evolution: F =", fidelity(pole, qiopa_numeric_evolution(gain, (1.0, 0.0), pole.n_max)))

phi = 0.4
eq = qiopa_equatorial_state(gain, phi)
numeric = qiopa_numeric_evolution(gain, (1 / math.sqrt(2), np.exp(1j * phi) / math.sqrt(2)), eq.n_max)
print("equatorial photon, closed form vs evolution: F =", fidelity(eq, change_basis(numeric, eq.basis)))

# In its own basis the equatorial macrostate only has odd counts in the first mode.
p = number_distribution(eq).probabilities
print(f"P(first mode odd) = {p[1::2, :].sum():.12f}")

gain = GainSetting(1.5)
dist = number_distribution(qiopa_equatorial_state(gain, 0.0))
for T in (1.0, 0.9, 0.5, 0.2):
    lossy = binomial_thinning(dist, LossSetting(T))
    q = lossy.probabilities
    print(f"T={T}: <n> = {mean_photon_number(lossy):.3f}, P(first mode odd) = {q[1::2, :].sum():.4f}")
