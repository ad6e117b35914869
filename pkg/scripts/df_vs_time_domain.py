"""Describing function of the first-order reset element against the
simulated first harmonic, over gamma and frequency."""

import math

import numpy as np

from resetpid.describing import df
from resetpid.reset import gfore
from resetpid.sim import first_harmonic

CORNER = 2 * math.pi * 100

if __name__ == "__main__":
    print(f"{'gamma':>6} {'f [Hz]':>9} {'|DF|':>10} {'|sim|':>10} {'dmag %':>8} {'dphase':>8}")
    for g in (-0.5, 0.0, 0.5):
        el = gfore(CORNER, g)
        for f in np.logspace(1, 4, 7):
            w = 2 * math.pi * f
            p, s = df(el, w), first_harmonic(el, w)
            print(f"{g:6.2f} {f:9.1f} {abs(p):10.6f} {abs(s):10.6f} {100 * (abs(p) / abs(s) - 1):8.4f} "
                  f"{math.degrees(np.angle(p / s)):8.4f}")
