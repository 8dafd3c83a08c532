"""Reference numbers used across the suite, re-derived at 30 digits.

Every constant frozen in a test or in the verification suite is listed
here and recomputed with mpmath from its closed form, independently of the
package code.
"""

import mpmath as mp
import pytest

mp.mp.dps = 30

E, NU, GC, ELL = mp.mpf(210000), mp.mpf("0.3"), mp.mpf("2.7"), mp.mpf("0.0075")
R, T, DG, VH = mp.mpf(8314), mp.mpf(300), mp.mpf("3.0e7"), mp.mpf(2000)
M_FE, M_H = mp.mpf("55.85"), mp.mpf("1.008")
CHI = mp.mpf("0.89")


def mole_fraction(c):
    w = mp.mpf(c) * mp.mpf("1e-6")
    a = w / M_H
    return a / (a + (1 - w) / M_FE)


def coverage(x):
    b = mp.exp(-DG / (R * T))
    return x / (x + b)


SIGMA_C = mp.sqrt(27 * E * GC / (256 * ELL))

FROZEN = {
    "mole_fraction_1ppm": (mole_fraction(1), 5.5403731695e-5, 1e-10),
    "isotherm_offset": (mp.exp(-DG / (R * T)), 5.97512978529e-6, 1e-11),
    "coverage_1ppm": (coverage(mole_fraction(1)), 0.902651668, 1e-9),
    "coverage_0.5ppm": (coverage(mole_fraction("0.5")), 0.822579302, 1e-9),
    "coverage_0.1ppm": (coverage(mole_fraction("0.1")), 0.481135210, 1e-9),
    "coverage_pure": (coverage(1), 0.999994024906, 1e-12),
    "coverage_5.54e-5": (coverage(mp.mpf("5.54e-5")), 0.90264575, 1e-8),
    "strength_ratio_1ppm": (mp.sqrt(1 - CHI * coverage(mole_fraction(1))), 0.443441107, 1e-9),
    "strength_ratio_0.5ppm": (mp.sqrt(1 - CHI * coverage(mole_fraction("0.5"))), 0.517594843, 1e-9),
    "strength_ratio_0.1ppm": (mp.sqrt(1 - CHI * coverage(mole_fraction("0.1"))), 0.756167748, 1e-9),
    "c11_iron": (E * (1 - NU) / ((1 + NU) * (1 - 2 * NU)), 282692.3077, 1e-4),
    "critical_stress": (SIGMA_C, 2823.72758955, 1e-8),
    "critical_strain": (mp.sqrt(GC / (3 * ELL * E)), 0.0239045721867, 1e-13),
    "cohesive_bound": (mp.pi / 160 * E * GC / SIGMA_C**2, 0.00139626340, 1e-11),
    "cohesive_bound_rounded": (mp.pi / 160 * E * GC / mp.mpf("2823.7") ** 2, 0.001396291, 1e-9),
    "length_over_bound": (ELL / (mp.pi / 160 * E * GC / SIGMA_C**2), 5.37148, 1e-5),
    "enrichment_100MPa": (mp.exp(VH * 100 / (R * T)), 1.08348861204, 1e-11),
    "erfc_1": (mp.erfc(1), 0.157299207050, 1e-12),
}


@pytest.mark.parametrize("name", sorted(FROZEN))
def test_frozen_value_matches_high_precision(name):
    exact, frozen, tol = FROZEN[name]
    assert abs(float(exact) - frozen) <= tol
