"""CODATA 2018 physical constants and derived tunneling-law prefactors.

All emission formulas in this package work with the conventional mixed
units of field-emission practice: fields in V/m, energies in eV, currents
in A. The two derived constants below absorb the unit conversions:

* ``fn_prefactor``      -- e^3/(8 pi h) expressed in A eV / V^2
* ``fn_exponent_factor`` -- 8 pi sqrt(2 m_e)/(3 h e) in (V/m) eV^-3/2
"""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    """Fundamental constants (SI). Defaults are CODATA 2018 values."""

    e: float = 1.602176634e-19       # elementary charge [C]
    h: float = 6.62607015e-34        # Planck constant [J s]
    m_e: float = 9.1093837015e-31    # electron mass [kg]
    eps0: float = 8.8541878128e-12   # vacuum permittivity [F/m]
    c: float = 299792458.0           # speed of light [m/s]

    @property
    def fn_prefactor(self) -> float:
        """Tunneling prefactor in A eV / V^2 (work function in eV)."""
        return self.e**2 / (8.0 * math.pi * self.h)

    @property
    def fn_exponent_factor(self) -> float:
        """Tunneling exponent factor in V/m per eV^(3/2)."""
        return (8.0 * math.pi * math.sqrt(2.0 * self.m_e)
                * self.e**0.5 / (3.0 * self.h))

    @property
    def schottky_prefactor(self) -> float:
        """Image-force barrier lowering in eV per sqrt(V/m)."""
        return math.sqrt(self.e / (4.0 * math.pi * self.eps0))

    @property
    def hc_ev_m(self) -> float:
        """Photon energy times wavelength, in eV m."""
        return self.h * self.c / self.e


#: Default constant set used throughout the package.
CODATA2018 = PhysicalConstants()
