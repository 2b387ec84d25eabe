"""Angular-spread behaviour of DFT beams seen by a near-field user.

Prints three tables: width versus range at several angles, width versus
angle at 0.01 R_d, and the boresight collapse past the EBRD (beams in the
spread and the power of the +-3/N beams relative to the peak).
"""

import math

import numpy as np

from nfbeam import ArrayConfig, PolarPoint
from nfbeam.beamscan import angular_spread, dft_profile
from nfbeam.codebook import PAPER_SIN_MAX, dft_codebook
from nfbeam.geometry import ebrd

DEG = math.pi / 180


def main():
    cfg = ArrayConfig()
    book = dft_codebook(cfg)
    sector = dft_codebook(cfg, -PAPER_SIN_MAX, PAPER_SIN_MAX)

    print("# width_sin versus range (exact gains)")
    print("theta_deg,range_m,width_sin,n_beams,law_D_cos2_over_r")
    for deg in (0, 30, 60):
        for r in (3.0, 5.0, 10.0, 20.0, 30.0):
            sm = angular_spread(dft_profile(cfg, PolarPoint(deg * DEG, r), book), book)
            law = cfg.aperture * math.cos(deg * DEG) ** 2 / r
            print(f"{deg},{r:g},{sm.width_sin:.4f},{sm.n_beams},{law:.4f}")

    print("\n# width_sin versus angle at 0.01 R_d")
    print("theta_deg,width_sin")
    r = 0.01 * cfg.rayleigh_distance
    for deg in (0, 30, 60, 80):
        sm = angular_spread(dft_profile(cfg, PolarPoint(deg * DEG, r), book, "fresnel"), book)
        print(f"{deg},{sm.width_sin:.4f}")

    print("\n# boresight collapse past the EBRD")
    print("r_over_ebrd,beams_full_grid,beams_sector_grid,outer_pair_ratio")
    s = np.sin(book.angles)
    outer = np.argmin(np.abs(s - 3 / cfg.n_elements))
    for f in (1.0, 1.1, 1.2, 1.25, 1.3, 1.5, 2.0):
        ue = PolarPoint(0.0, f * ebrd(cfg, 0.0))
        p = dft_profile(cfg, ue, book).power
        n_full = angular_spread(dft_profile(cfg, ue, book), book).n_beams
        n_sector = angular_spread(dft_profile(cfg, ue, sector), sector).n_beams
        print(f"{f:g},{n_full},{n_sector},{p[outer] / p.max():.3f}")


if __name__ == "__main__":
    main()
