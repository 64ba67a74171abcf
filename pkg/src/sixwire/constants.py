"""Physical and atomic constants (SI) used throughout the package.

Calcium-ion values follow the usual 40Ca+ literature: P1/2 lifetime 7.1 ns,
P1/2 -> D3/2 branching of 6 %, Lande factors g_S = 2, g_P = 2/3, g_D = 4/5.
"""

import numpy as np
from scipy import constants as sc

e = sc.e
hbar = sc.hbar
h = sc.h
c = sc.c
amu = sc.atomic_mass
mu_B = sc.physical_constants["Bohr magneton"][0]

#: 40Ca+ ion mass (neutral atomic mass minus one electron).
M_CA40 = 39.962590863 * amu - sc.m_e

#: default trap drive, 25.8 MHz
OMEGA_RF = 2 * np.pi * 25.8e6

#: P1/2 total decay rate (s^-1)
GAMMA_P = 1.0 / 7.1e-9
#: fraction of P1/2 decays ending in D3/2
BRANCH_PD = 0.06

LAMBDA_397 = 396.959e-9
LAMBDA_866 = 866.214e-9

G_S = 2.0
G_P = 2.0 / 3.0
G_D = 4.0 / 5.0

EV = sc.electron_volt
