"""Mean achievable rate of every scheme versus user range at 10 dB SNR.

Usage: python3 scripts/rate_vs_distance.py [--trials N] [--workers W] [--out DIR]
"""

import sys

from nfbeam.cli import main

if __name__ == "__main__":
    sys.exit(main(["--sweep", "distance", "--out", "results/distance", *sys.argv[1:]]))
