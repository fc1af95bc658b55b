"""Walsh-Hadamard DS-OCDMA with a DC offset for unipolar intensity modulation.

Row 0 of the codebook (all ones) is never handed to an AP: correlating with
it does not cancel the DC offset, so a codebook of spreading factor SF
serves at most SF - 1 APs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import hadamard

__all__ = [
    "Codebook",
    "UnipolarFrame",
    "hadamard_codebook",
    "spreading_factor_for",
    "spread",
    "despread",
    "estimate_ap_powers",
]


@dataclass(frozen=True)
class Codebook:
    spreading_factor: int
    codes: np.ndarray

    def row(self, index: int) -> np.ndarray:
        return self.codes[index]


@dataclass(frozen=True)
class UnipolarFrame:
    chips: np.ndarray
    dc_offset: float


def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def hadamard_codebook(sf: int) -> Codebook:
    """Sylvester-ordered Walsh-Hadamard codebook of size ``sf``."""
    if int(sf) != sf or sf < 2 or not _is_power_of_two(int(sf)):
        raise ValueError(f"spreading factor must be a power of two >= 2, got {sf}")
    codes = hadamard(int(sf), dtype=np.int64)
    codes.setflags(write=False)
    return Codebook(int(sf), codes)


def spreading_factor_for(n_aps: int) -> int:
    """Smallest power of two strictly greater than the AP count."""
    sf = 2
    while sf <= n_aps:
        sf *= 2
    return sf


def spread(bits, code, dc_offset: float = 1.0) -> UnipolarFrame:
    if dc_offset < 1:
        raise ValueError("dc_offset below 1 would produce negative chips")
    bits = np.asarray(bits, dtype=np.int64).ravel()
    code = np.asarray(code, dtype=float)
    symbols = 2 * bits - 1
    chips = (symbols[:, None] * code[None, :] + dc_offset).ravel()
    return UnipolarFrame(chips, float(dc_offset))


def despread(signal, code) -> np.ndarray:
    """Per-bit correlation of a chip stream with one code row."""
    if isinstance(signal, UnipolarFrame):
        signal = signal.chips
    signal = np.asarray(signal, dtype=float).ravel()
    code = np.asarray(code, dtype=float)
    sf = code.size
    if signal.size % sf:
        raise ValueError(f"signal length {signal.size} is not a multiple of SF={sf}")
    return signal.reshape(-1, sf) @ code


def estimate_ap_powers(received, codebook: Codebook, code_indices) -> np.ndarray:
    """Amplitude seen from each AP: mean over bit slots of |correlation| / SF."""
    out = []
    for idx in code_indices:
        corr = despread(received, codebook.row(idx))
        out.append(np.abs(corr).mean() / codebook.spreading_factor if corr.size else 0.0)
    return np.asarray(out, dtype=float)
