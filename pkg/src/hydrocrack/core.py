"""Material parameters and solution-state containers.

Unit system used throughout the package: N, mm, MPa, mol, s, K.  Energy
release rates are therefore in N/mm, which is numerically equal to kJ/m^2.
Hydrogen concentration is carried as wt ppm in every field solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

#: Universal gas constant in N mm / (mol K).
GAS_CONSTANT = 8314.0


class ParameterError(ValueError):
    """Raised when a material parameter violates its admissible range."""


@dataclass(frozen=True)
class MaterialParams:
    """Elastic, fracture and hydrogen-transport constants.

    Attributes
    ----------
    young_modulus : float
        Young's modulus E (MPa).
    poisson_ratio : float
        Poisson's ratio, ``0 <= nu < 0.5``.
    gc0 : float
        Hydrogen-free critical energy release rate (N/mm).
    length_scale : float
        Phase-field regularisation length (mm).
    stiffness_floor : float
        Residual stiffness ``k`` of the degradation function.
    damage_coeff : float
        Hydrogen damage coefficient chi, the slope of Gc(theta)/Gc(0).
    diffusivity : float
        Lattice diffusion coefficient D (mm^2/s).
    molar_volume : float
        Partial molar volume of hydrogen (mm^3/mol).
    binding_energy : float
        Gibbs free energy of segregation (N mm/mol).
    temperature : float
        Absolute temperature (K).
    host_molar_mass, impurity_molar_mass : float
        Molar masses (g/mol) used to convert wt ppm to mole fraction.
    gc_floor_fraction : float
        Lower bound on Gc(theta) as a fraction of ``gc0``.
    """

    young_modulus: float = 210000.0
    poisson_ratio: float = 0.3
    gc0: float = 2.7
    length_scale: float = 0.0075
    stiffness_floor: float = 1e-7
    damage_coeff: float = 0.89
    diffusivity: float = 1e-3
    molar_volume: float = 2000.0
    binding_energy: float = 3.0e7
    temperature: float = 300.0
    host_molar_mass: float = 55.85
    impurity_molar_mass: float = 1.008
    gc_floor_fraction: float = 1e-4

    def __post_init__(self):
        self.validate()

    @property
    def gas_constant(self) -> float:
        return GAS_CONSTANT

    @property
    def rt(self) -> float:
        """Product R*T in N mm/mol."""
        return GAS_CONSTANT * self.temperature

    def validate(self) -> None:
        checks = [
            (self.young_modulus > 0, "young_modulus must be > 0"),
            (0 <= self.poisson_ratio < 0.5, "poisson_ratio must lie in [0, 0.5)"),
            (self.gc0 > 0, "gc0 must be > 0"),
            (self.length_scale > 0, "length_scale must be > 0"),
            (0 < self.stiffness_floor < 1e-2, "stiffness_floor must lie in (0, 1e-2)"),
            (0 <= self.damage_coeff <= 1, "damage_coeff must lie in [0, 1]"),
            (self.diffusivity >= 0, "diffusivity must be >= 0"),
            (self.molar_volume >= 0, "molar_volume must be >= 0"),
            (self.temperature > 0, "temperature must be > 0"),
            (self.host_molar_mass > 0, "host_molar_mass must be > 0"),
            (self.impurity_molar_mass > 0, "impurity_molar_mass must be > 0"),
            (0 < self.gc_floor_fraction < 1, "gc_floor_fraction must lie in (0, 1)"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ParameterError(msg)

    def with_overrides(self, **kwargs) -> "MaterialParams":
        return replace(self, **kwargs)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def default_iron_params() -> MaterialParams:
    """Iron-based steel used in the cracked-plate benchmark.

    E = 210 GPa, nu = 0.3, Gc(0) = 2.7 N/mm, l = 0.0075 mm, chi = 0.89,
    partial molar volume 2000 mm^3/mol, segregation energy 30 kJ/mol and
    T = 300 K.
    """
    return MaterialParams()


@dataclass
class FieldState:
    """Nodal unknowns plus the Gauss-point history of one time instant.

    ``history`` has shape ``(n_elements, n_gauss)``; the nodal arrays have
    one entry per node (two for displacement, interleaved x, y).
    """

    displacement: np.ndarray
    phase: np.ndarray
    concentration: np.ndarray
    history: np.ndarray
    sigma_h_nodal: np.ndarray
    time: float = 0.0
    raw_phase_range: Optional[tuple[float, float]] = field(default=None, compare=False)

    @classmethod
    def zeros(cls, n_nodes: int, n_elements: int, n_gauss: int, c0: float = 0.0) -> "FieldState":
        return cls(
            displacement=np.zeros(2 * n_nodes),
            phase=np.zeros(n_nodes),
            concentration=np.full(n_nodes, float(c0)),
            history=np.zeros((n_elements, n_gauss)),
            sigma_h_nodal=np.zeros(n_nodes),
        )

    def copy(self) -> "FieldState":
        return FieldState(
            displacement=self.displacement.copy(),
            phase=self.phase.copy(),
            concentration=self.concentration.copy(),
            history=self.history.copy(),
            sigma_h_nodal=self.sigma_h_nodal.copy(),
            time=self.time,
            raw_phase_range=self.raw_phase_range,
        )

    @property
    def n_nodes(self) -> int:
        return self.phase.shape[0]

    def displacement_xy(self) -> np.ndarray:
        return self.displacement.reshape(-1, 2)
