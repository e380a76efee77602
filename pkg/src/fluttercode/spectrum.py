"""Power-spectrum conditioning analysis for exposure sequences.

The broadband quality of a shutter pattern is judged by the dB
magnitude of its zero-padded DFT: the worst (minimum) bin is the
frequency a deconvolution cannot recover. Scoring uses bins 0 through
n_fft/2 inclusive, with magnitudes normalized by n_fft/2.

Exact spectral nulls (a rect pattern has them) would map to -inf dB;
they are clamped to a finite floor so merit arithmetic stays ordered
and serializable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .sequences import ExposureSequence

DEFAULT_N_FFT = 64
FLOOR_DB = -300.0

# Raw DFT magnitudes of binary sequences are either 0 or bounded well
# away from 0; anything below this is roundoff around an exact null.
NULL_MAGNITUDE = 1e-9


class EmptyInputError(ValueError):
    """An operation over a collection of spectra received none."""


def _as_bits(seq) -> np.ndarray:
    if isinstance(seq, ExposureSequence):
        return np.asarray(seq.bits, dtype=np.float64)
    return np.asarray(seq, dtype=np.float64)


def dft(seq, n_fft: int | None = None) -> np.ndarray:
    """Full complex DFT of a sequence, zero-padded to n_fft samples.

    This is the transform backend every spectral operation is built on;
    its correctness contract is agreement with the direct O(n^2) sum.
    """
    bits = _as_bits(seq)
    n = len(bits) if n_fft is None else int(n_fft)
    if n < len(bits):
        raise ValueError(f"n_fft={n} is shorter than the sequence ({len(bits)})")
    return np.fft.fft(bits, n)


def _magnitudes_to_db(mag: np.ndarray, n_fft: int, floor_db: float) -> np.ndarray:
    scaled = mag / (n_fft / 2)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(scaled)
    db = np.where(mag < NULL_MAGNITUDE, floor_db, db)
    return np.maximum(db, floor_db)


def min_db_many(bit_rows: np.ndarray, n_fft: int = DEFAULT_N_FFT,
                floor_db: float = FLOOR_DB) -> np.ndarray:
    """Minimum dB bin for each row of a (M, W) bit matrix, vectorized.

    Shares the exact per-bin mapping of power_spectrum; used for scoring
    whole populations without building PowerSpectrum objects.
    """
    rows = np.asarray(bit_rows, dtype=np.float64)
    if rows.ndim != 2:
        raise ValueError("expected a 2-D bit matrix")
    if n_fft < rows.shape[1]:
        raise ValueError(f"n_fft={n_fft} is shorter than the sequences")
    mag = np.abs(np.fft.rfft(rows, n_fft, axis=1))
    return _magnitudes_to_db(mag, n_fft, floor_db).min(axis=1)


@dataclass(frozen=True)
class PowerSpectrum:
    """Per-bin dB magnitudes for bins 0..n_fft/2 of a padded DFT."""

    db: tuple[float, ...]
    n_fft: int = DEFAULT_N_FFT
    floor_db: float = field(default=FLOOR_DB)

    def __post_init__(self):
        db = tuple(float(v) for v in self.db)
        if len(db) != self.n_fft // 2 + 1:
            raise ValueError(
                f"expected {self.n_fft // 2 + 1} bins for n_fft={self.n_fft}, "
                f"got {len(db)}"
            )
        if any(v < self.floor_db for v in db):
            raise ValueError("dB value below floor")
        object.__setattr__(self, "db", db)

    def __len__(self) -> int:
        return len(self.db)

    @property
    def min_db(self) -> float:
        return min(self.db)


def power_spectrum(seq, n_fft: int = DEFAULT_N_FFT,
                   floor_db: float = FLOOR_DB) -> PowerSpectrum:
    """dB power spectrum of a sequence zero-padded to n_fft samples.

    Bin j maps to 20*log10(|F(j)| / (n_fft/2)) for j in [0, n_fft/2];
    exact nulls map to floor_db.
    """
    bits = _as_bits(seq)
    if n_fft < len(bits):
        raise ValueError(f"n_fft={n_fft} is shorter than the sequence ({len(bits)})")
    mag = np.abs(np.fft.rfft(bits, n_fft))
    db = _magnitudes_to_db(mag, n_fft, floor_db)
    return PowerSpectrum(tuple(db), n_fft, floor_db)


def min_db(spec: PowerSpectrum) -> float:
    """Worst attenuated bin, DC included: the conditioning bottleneck."""
    return spec.min_db


def combined_response(specs) -> PowerSpectrum:
    """Per-bin best (maximum dB) across several windows' spectra.

    Models picking the best-conditioned frequency band from each of the
    N images of an interleaved exposure.
    """
    specs = list(specs)
    if not specs:
        raise EmptyInputError("need at least one spectrum")
    n_fft = specs[0].n_fft
    if any(s.n_fft != n_fft for s in specs):
        raise ValueError("spectra must share one n_fft")
    stacked = np.array([s.db for s in specs])
    return PowerSpectrum(tuple(stacked.max(axis=0)), n_fft, specs[0].floor_db)


class ComplementCheck(NamedTuple):
    ok: bool
    max_deviation: float
    dc_difference: float


def complement_spectrum_check(seq: ExposureSequence,
                              rel_tol: float = 1e-9) -> ComplementCheck:
    """Verify that inverting a sequence preserves its unpadded DFT magnitudes.

    Flipping 0 and 1 flips the phase of every non-DC component by 180
    degrees but leaves the magnitudes untouched, so a pattern and its
    complement are equally well conditioned. The identity is exact only
    for the unpadded length-W transform (F_c = W*delta - F_s); padded
    spectra of the two genuinely differ away from DC.

    Per-bin deviations are normalized by max(|F_s(k)|, 1) so bins that
    are themselves null do not blow up the relative measure.
    """
    if len(seq) < 2:
        raise ValueError("need at least two chips to have non-DC bins")
    mag_s = np.abs(dft(seq))
    mag_c = np.abs(dft(seq.complement()))
    dev = np.abs(mag_c[1:] - mag_s[1:]) / np.maximum(mag_s[1:], 1.0)
    max_dev = float(dev.max())
    dc_diff = float(abs(mag_c[0] - mag_s[0]))
    return ComplementCheck(max_dev <= rel_tol, max_dev, dc_diff)


def spectrum_csv(spec: PowerSpectrum) -> str:
    """CSV rendering with header `bin,db`, one row per bin."""
    lines = ["bin,db"]
    lines += [f"{j},{v:.6f}" for j, v in enumerate(spec.db)]
    return "\n".join(lines) + "\n"
