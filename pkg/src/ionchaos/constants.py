"""Physical constants, SI units (CODATA 2018)."""

import math

# Exact by SI definition.
C = 299_792_458.0            # speed of light, m/s
H_PLANCK = 6.626_070_15e-34  # Planck constant, J s
HBAR = H_PLANCK / (2.0 * math.pi)

# Measured.
EPS0 = 8.854_187_8128e-12    # vacuum permittivity, F/m
