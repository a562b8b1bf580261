"""Physical constants, CODATA 2018 recommended values (SI).

Source: E. Tiesinga et al., "CODATA recommended values of the fundamental
physical constants: 2018", Rev. Mod. Phys. 93, 025010 (2021);
https://physics.nist.gov/cuu/Constants/

``C``, ``E_CHARGE`` and ``H_PLANCK`` are exact by definition of the 2019 SI.
All other modules import constants from here; never inline them.
"""

import math

C = 299_792_458.0                      # speed of light in vacuum, m s^-1 (exact)
E_CHARGE = 1.602_176_634e-19           # elementary charge, C (exact)
H_PLANCK = 6.626_070_15e-34            # Planck constant, J s (exact)
HBAR = H_PLANCK / (2.0 * math.pi)      # reduced Planck constant, J s
M_ELECTRON = 9.109_383_7015e-31        # electron mass, kg (u_r 3.0e-10)
EPSILON_0 = 8.854_187_8128e-12         # vacuum electric permittivity, F m^-1 (u_r 1.5e-10)
ALPHA = 7.297_352_5693e-3              # fine-structure constant (u_r 1.5e-10)

K_COULOMB = 1.0 / (4.0 * math.pi * EPSILON_0)   # k = (4 pi eps0)^-1, N m^2 C^-2
