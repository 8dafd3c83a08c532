"""Pointwise constitutive laws.

All functions accept scalars or numpy arrays and broadcast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import GAS_CONSTANT, ParameterError

_THETA_TOL = 1e-9


def degradation(phi, k=1e-7):
    """Degradation function g(phi) = (1 - phi)^2 + k."""
    return (1.0 - phi) ** 2 + k


def degradation_derivative(phi):
    """dg/dphi = -2 (1 - phi)."""
    return -2.0 * (1.0 - phi)


def gc_degraded(theta, gc0, chi, floor_fraction=1e-4):
    """Hydrogen-degraded critical energy release rate Gc0 (1 - chi theta).

    The result never drops below ``floor_fraction * gc0``.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < -_THETA_TOL) or np.any(theta > 1.0 + _THETA_TOL):
        raise ValueError("coverage theta must lie in [0, 1]")
    theta = np.clip(theta, 0.0, 1.0)
    gc = gc0 * np.maximum(1.0 - chi * theta, floor_fraction)
    return gc if gc.ndim else float(gc)


def wtppm_to_mole_fraction(c_wtppm, host_molar_mass=55.85, impurity_molar_mass=1.008):
    """Convert a hydrogen content in wt ppm to impurity mole fraction."""
    w = np.asarray(c_wtppm, dtype=float) * 1e-6
    n_imp = w / impurity_molar_mass
    n_host = (1.0 - w) / host_molar_mass
    x = n_imp / (n_imp + n_host)
    return x if x.ndim else float(x)


def surface_coverage(c_mole_fraction, delta_g=3.0e7, R=GAS_CONSTANT, T=300.0):
    """Langmuir-McLean coverage of the decohering interface.

    ``c_mole_fraction`` is the bulk lattice concentration as an impurity
    mole fraction, ``delta_g`` the segregation energy in N mm/mol.
    """
    if T <= 0:
        raise ValueError("temperature must be positive")
    c = np.asarray(c_mole_fraction, dtype=float)
    b = math.exp(-delta_g / (R * T))
    theta = c / (c + b)
    return theta if theta.ndim else float(theta)


def coverage_from_wtppm(c_wtppm, params):
    """Coverage theta for a concentration given in wt ppm.

    Negative concentrations (numerical undershoot) map to zero coverage.
    """
    c = np.maximum(np.asarray(c_wtppm, dtype=float), 0.0)
    x = wtppm_to_mole_fraction(c, params.host_molar_mass, params.impurity_molar_mass)
    return surface_coverage(x, params.binding_energy, GAS_CONSTANT, params.temperature)


@dataclass(frozen=True)
class PlaneStrainElasticity:
    """Plane-strain constitutive matrix in Voigt order (xx, yy, xy).

    Shear strain is engineering shear (gamma_xy = 2 eps_xy).
    """

    c0: np.ndarray
    young_modulus: float
    poisson_ratio: float

    def stress(self, strain):
        """Undamaged stress for Voigt strain(s) of shape (..., 3)."""
        return np.asarray(strain) @ self.c0.T

    def sigma_zz(self, stress):
        """Out-of-plane stress nu (sigma_xx + sigma_yy)."""
        stress = np.asarray(stress)
        return self.poisson_ratio * (stress[..., 0] + stress[..., 1])

    def hydrostatic(self, stress):
        """Hydrostatic stress including the plane-strain sigma_zz."""
        stress = np.asarray(stress)
        s = stress[..., 0] + stress[..., 1]
        return s * (1.0 + self.poisson_ratio) / 3.0


def plane_strain_stiffness(E, nu) -> PlaneStrainElasticity:
    if E <= 0:
        raise ParameterError("Young's modulus must be positive")
    if not 0 <= nu < 0.5:
        raise ParameterError("Poisson's ratio must lie in [0, 0.5)")
    f = E / ((1.0 + nu) * (1.0 - 2.0 * nu))
    c0 = f * np.array(
        [
            [1.0 - nu, nu, 0.0],
            [nu, 1.0 - nu, 0.0],
            [0.0, 0.0, 0.5 - nu],
        ]
    )
    return PlaneStrainElasticity(c0=c0, young_modulus=float(E), poisson_ratio=float(nu))


def strain_energy_density(strain, stiffness: PlaneStrainElasticity):
    """psi_0 = 1/2 eps^T C0 eps for Voigt strain(s) of shape (..., 3)."""
    strain = np.asarray(strain, dtype=float)
    psi = 0.5 * np.einsum("...i,ij,...j->...", strain, stiffness.c0, strain)
    return psi if psi.ndim else float(psi)


# --- homogeneous one-dimensional solution -----------------------------------


def homogeneous_phi(strain, E, gc, ell):
    """Phase field of a homogeneously strained 1D bar."""
    a = E * np.asarray(strain, dtype=float) ** 2 * ell
    out = a / (gc + a)
    return out if out.ndim else float(out)


def homogeneous_stress(strain, E, gc, ell):
    """Stress-strain law of a homogeneously strained 1D bar."""
    eps = np.asarray(strain, dtype=float)
    out = (gc / (gc + E * eps**2 * ell)) ** 2 * E * eps
    return out if out.ndim else float(out)


def critical_stress(E, gc, ell):
    return math.sqrt(27.0 * E * gc / (256.0 * ell))


def critical_strain(E, gc, ell):
    return math.sqrt(gc / (3.0 * ell * E))


def cohesive_mesh_bound(E, gc, sigma_c):
    """Largest element size resolving a cohesive zone with 20 elements."""
    if E <= 0 or gc <= 0 or sigma_c <= 0:
        raise ValueError("all inputs must be positive")
    return math.pi / 160.0 * E * gc / sigma_c**2
