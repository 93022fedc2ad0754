"""Physical constants in SI units.

All frequencies anywhere in this package are angular frequencies (rad/s),
all energies are Joules, all lengths are metres.  Values below are CODATA
2018 recommended values; E_CHARGE and C_LIGHT are exact by the 2019 SI
definition.
"""

HBAR = 1.054571817e-34  # J s
EPSILON_0 = 8.8541878128e-12  # F / m
E_CHARGE = 1.602176634e-19  # C, exact
ATOMIC_MASS = 1.66053906660e-27  # kg
ELECTRON_MASS = 9.1093837015e-31  # kg
C_LIGHT = 299792458.0  # m / s, exact

# Singly charged ion masses: neutral atomic mass (AME2020) minus one electron.
M_CA40_ION = 39.962590863 * ATOMIC_MASS - ELECTRON_MASS
M_BE9_ION = 9.012183065 * ATOMIC_MASS - ELECTRON_MASS

# 4S_1/2 - 3D_5/2 quadrupole transition of Ca-40, the usual optical qubit.
CA40_QUBIT_WAVELENGTH = 729e-9  # m
