"""Near-field beam training with far-field (DFT) codebooks.

Simulation library for ultra-massive MIMO uniform linear arrays: steering
vectors, polar and DFT codebooks, Fresnel-form DFT beam gain, angular-spread
lookup-table estimation (CI-DFT) and the usual beam-training baselines.
"""

from nfbeam.geometry import UNBOUNDED, ArrayConfig, PolarPoint

__all__ = ["ArrayConfig", "PolarPoint", "UNBOUNDED"]
__version__ = "0.1.0"
