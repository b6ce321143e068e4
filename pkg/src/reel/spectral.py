"""Discrete Fourier transforms and value/frequency domain decomposition.

A signal is split against a magnitude threshold beta: DFT bins with
|coefficient| > beta stay in the frequency domain, everything else is
transformed back and kept in the value domain. The two components always
reconstruct the input exactly (up to FFT roundoff), whatever the
threshold. Spectra use the unnormalized forward-DFT convention, so the
DC bin of dft2 equals the plain sum of the samples and beta scales with
grid size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError
from .field import GridSpec, ScalarField

# Residual imaginary mass allowed when a symmetric-mask inverse transform
# is declared real, relative to the signal norm.
_IMAG_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Complex DFT coefficients of a field, same shape/layout as the grid."""

    grid: GridSpec
    coeffs: np.ndarray  # (nx, ny) complex128, unnormalized forward DFT

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.coeffs, dtype=np.complex128)
        if arr.shape != self.grid.shape:
            raise ValueError(
                f"spectrum shape {arr.shape} does not match grid {self.grid.shape}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def zeros(cls, grid: GridSpec) -> Spectrum:
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    def vector(self) -> np.ndarray:
        """Canonical row-major flattening, matching ScalarField.vector."""
        return self.coeffs.ravel()


@dataclass(frozen=True, eq=False)
class FrequencyMask:
    """Boolean keep-set over frequency bins, conjugate-symmetric."""

    grid: GridSpec
    keep: np.ndarray  # (nx, ny) bool

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.keep, dtype=bool)
        if arr.shape != self.grid.shape:
            raise ValueError(
                f"mask shape {arr.shape} does not match grid {self.grid.shape}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "keep", arr)

    @classmethod
    def none(cls, grid: GridSpec) -> FrequencyMask:
        return cls(grid, np.zeros(grid.shape, dtype=bool))

    @classmethod
    def all(cls, grid: GridSpec) -> FrequencyMask:
        return cls(grid, np.ones(grid.shape, dtype=bool))

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.keep, conjugate_bins(self.keep)))

    def count(self) -> int:
        return int(self.keep.sum())


@dataclass(frozen=True, eq=False)
class VfddPair:
    """Value component + masked frequency component of one signal.

    s_val + idft2(s_freq) reconstructs the original signal; s_freq is zero
    wherever the mask is false. beta is None when the split came from a
    caller-supplied mask rather than a threshold.
    """

    s_val: ScalarField
    s_freq: Spectrum
    mask: FrequencyMask
    beta: float | None

    def reconstruct(self) -> ScalarField:
        return ScalarField(
            self.s_val.grid, self.s_val.values + idft2(self.s_freq).values
        )


def conjugate_bins(a: np.ndarray) -> np.ndarray:
    """Reindex bin (ki, kj) -> (-ki mod nx, -kj mod ny)."""
    return np.roll(np.roll(a[::-1, ::-1], 1, axis=0), 1, axis=1)


def dft2(f: ScalarField) -> Spectrum:
    """Unnormalized 2D forward DFT; coeffs[0,0] is the sample sum."""
    return Spectrum(f.grid, np.fft.fft2(f.values))


def idft2(s: Spectrum, check_tol: float | None = None, check_scale: float | None = None) -> ScalarField:
    """Inverse 2D DFT, discarding the imaginary part.

    If check_tol is given, raises when the imaginary residue exceeds
    check_tol times the real-part norm (guards against asymmetric masks).
    check_scale supplies an extra norm floor: when inverting a remainder
    spectrum that is itself rounding noise, the meaningful scale is the
    field the spectrum was carved out of, not the remainder.
    """
    full = np.fft.ifft2(s.coeffs)
    real = full.real
    if check_tol is not None:
        scale = float(np.linalg.norm(real))
        if check_scale is not None:
            scale = max(scale, check_scale)
        imag = float(np.abs(full.imag).max())
        if imag > check_tol * max(scale, 1e-300):
            raise ValueError(
                f"inverse transform is not real: max imag {imag:.3e} vs norm {scale:.3e}"
            )
    return ScalarField(s.grid, real)


def _split(spec: Spectrum, keep: np.ndarray, beta: float | None) -> VfddPair:
    grid = spec.grid
    # Parseval: ||f||_2 recovered from the full spectrum, floor for the
    # realness check when the remainder is pure rounding noise
    scale0 = float(np.linalg.norm(spec.coeffs)) / math.sqrt(grid.ncells)
    if not keep.any():
        # nothing kept: the value side is the full inverse transform
        s_val = idft2(spec, check_tol=_IMAG_TOL, check_scale=scale0)
        return VfddPair(s_val, Spectrum.zeros(grid), FrequencyMask(grid, keep), beta)
    s_freq = Spectrum(grid, np.where(keep, spec.coeffs, 0.0 + 0.0j))
    if keep.all():
        s_val = ScalarField.zeros(grid)
    else:
        low = Spectrum(grid, np.where(keep, 0.0 + 0.0j, spec.coeffs))
        s_val = idft2(low, check_tol=_IMAG_TOL, check_scale=scale0)
    return VfddPair(s_val, s_freq, FrequencyMask(grid, keep), beta)


def vfdd(f: ScalarField, beta: float) -> VfddPair:
    """Split a field against a spectral magnitude threshold.

    Bins with |F(f)| strictly above beta are kept in the frequency
    component; ties and everything below return to the value domain. The
    keep-set is symmetrized (OR with the conjugate bin) so the value
    component is real.
    """
    if not np.isfinite(beta) and beta > 0:
        # +inf threshold: nothing clears it, skip the transform entirely
        return VfddPair(
            f, Spectrum.zeros(f.grid), FrequencyMask.none(f.grid), float(beta)
        )
    if beta < 0.0 or np.isnan(beta):
        raise ValueError(f"beta must be >= 0, got {beta}")
    spec = dft2(f)
    keep = np.abs(spec.coeffs) > beta
    keep |= conjugate_bins(keep)
    return _split(spec, keep, float(beta))


def decompose_with_mask(f: ScalarField, mask: FrequencyMask) -> VfddPair:
    """Split a field with a caller-supplied keep-set.

    Used to decompose feature fields consistently with the mask derived
    from the ground-truth change they will be matched against; linear in f
    for a fixed mask. Shortcuts the transform for the all-false mask so a
    pure value-domain split is bitwise the identity.
    """
    if f.grid != mask.grid:
        raise GridMismatchError(f"field grid {f.grid} does not match mask grid {mask.grid}")
    if not mask.keep.any():
        return VfddPair(f, Spectrum.zeros(f.grid), mask, None)
    return _split(dft2(f), mask.keep, None)


def percentile_threshold(f: ScalarField, keep_fraction: float) -> float:
    """Threshold that keeps roughly the top keep_fraction of bins of f."""
    if not 0.0 < keep_fraction <= 1.0:
        raise ValueError(f"keep fraction must be in (0, 1], got {keep_fraction}")
    mags = np.abs(np.fft.fft2(f.values)).ravel()
    if keep_fraction == 1.0:
        return 0.0
    return float(np.percentile(mags, 100.0 * (1.0 - keep_fraction)))


def sparsity_report(p: VfddPair, tol: float) -> tuple[int, int]:
    """Count entries with magnitude above tol in each component."""
    if tol < 0.0:
        raise ValueError(f"tol must be >= 0, got {tol}")
    k_val = int((np.abs(p.s_val.values) > tol).sum())
    k_freq = int((np.abs(p.s_freq.coeffs) > tol).sum())
    return k_val, k_freq
