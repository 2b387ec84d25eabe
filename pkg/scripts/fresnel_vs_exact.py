"""Closed-form (Fresnel) DFT beam gain against the exact spherical sum.

For each (angle, range) on a 3x3 grid, prints the relative error at the
strongest exact beam and whether the Fresnel pick is an exact-gain
maximizer (mirror-symmetric boresight profiles have tied beams).
"""

import math

import numpy as np

from nfbeam import ArrayConfig, PolarPoint
from nfbeam.beamscan import gain_exact, gain_fresnel
from nfbeam.codebook import dft_codebook

DEG = math.pi / 180


def main():
    cfg = ArrayConfig()
    book = dft_codebook(cfg)
    print("theta_deg,range_m,exact_peak,fresnel_at_peak,rel_err,same_argmax")
    for deg in (0, 30, 60):
        for r in (3.5, 10.0, 35.0):
            ue = PolarPoint(deg * DEG, r)
            ex = gain_exact(cfg, ue, book.angles)
            fr = gain_fresnel(cfg, ue, book.angles)
            k = int(np.argmax(ex))
            print(f"{deg},{r:g},{ex[k]:.4f},{fr[k]:.4f},{abs(fr[k] - ex[k]) / ex[k]:.3f},{ex[int(np.argmax(fr))] >= ex[k] * (1 - 1e-9)}")


if __name__ == "__main__":
    main()
