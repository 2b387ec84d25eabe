"""Mean achievable rate of every scheme versus SNR, users drawn over 3-35 m.

Usage: python3 scripts/rate_vs_snr.py [--trials N] [--workers W] [--out DIR]
"""

import sys

from nfbeam.cli import main

if __name__ == "__main__":
    sys.exit(main(["--sweep", "snr", "--out", "results/snr", *sys.argv[1:]]))
