"""Internal unit convention.

Lengths are measured in healing lengths, and hbar = m = 1.  With
xi = hbar / sqrt(2 m g n) = 1 this fixes g*n = 1/2, the sound speed
c = sqrt(g n / m) = 1/sqrt(2), the kink inverse width kappa(0) = 1/sqrt(2)
and m c^2 = 1/2.  Energies come out in units of hbar^2 / (m xi^2).
"""

import math

HBAR = 1.0
MASS = 1.0
XI = 1.0
G_TIMES_N = 0.5
SOUND_SPEED = 1.0 / math.sqrt(2.0)
KAPPA0 = 1.0 / math.sqrt(2.0)
MC2 = MASS * SOUND_SPEED**2

TAG = "xi=hbar=m=1; F_scaled=F*xi^2; lengths in xi"


def convention() -> dict:
    """Metadata block attached to every report and output file."""
    return {
        "tag": TAG,
        "hbar": HBAR,
        "mass": MASS,
        "healing_length": XI,
        "g_times_n": G_TIMES_N,
        "sound_speed": SOUND_SPEED,
        "kappa0": KAPPA0,
    }
