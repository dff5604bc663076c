"""Digit-vector encoders (diagonal and banded light patterns) and the
detector that recovers digits from integrated cell intensities.

Diagonal layout: cells of equal physical size along the lower-left to
upper-right diagonal, most significant digit in the upper-right corner. With
interleaving on, one dark guard cell separates consecutive digits so blur from
the optics cannot bleed between them. Digit marks are squares of half the
cell side, drawn with coverage-weighted (anti-aliased) edge pixels so the
integrated energy per digit is independent of how cells align with the pixel
grid.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DetectionError
from .field import ComplexField, IntensityImage

MAX_DIGIT = 1 << 12  # dynamic-range assumption: 12 stops


@dataclass(frozen=True)
class CellLayout:
    """Geometry of the encoding cells along the diagonal.

    n_cells counts every cell including guards; cell_width is the physical
    cell side (mm). With interleave set, digits occupy every other cell.
    """

    n_cells: int
    cell_width: float
    interleave: bool = False
    mark_fraction: float = 0.5

    def __post_init__(self):
        if self.n_cells < 1 or self.cell_width <= 0:
            raise ConfigurationError("layout needs n_cells >= 1 and cell_width > 0")
        if not 0 < self.mark_fraction <= 1:
            raise ConfigurationError("mark_fraction must be in (0, 1]")

    @property
    def stride(self) -> int:
        return 2 if self.interleave else 1

    @property
    def window_width(self) -> float:
        """Physical width integrated per cell.

        Interleaved digits spread across their guard cells after repeated
        optical multiplies (each multiply convolves marks once), so the
        readout window spans the full digit pitch; the blur never reaches the
        next digit's window.
        """
        return self.cell_width * self.stride

    @property
    def digit_capacity(self) -> int:
        return (self.n_cells + self.stride - 1) // self.stride

    def cell_centers(self) -> np.ndarray:
        """Diagonal coordinate of each cell center, cell 0 at the MSB corner."""
        c = np.arange(self.n_cells)
        return ((self.n_cells - 1) / 2 - c) * self.cell_width

    @classmethod
    def spanning(cls, n_cells: int, extent: float, interleave: bool = False,
                 mark_fraction: float = 0.5) -> "CellLayout":
        return cls(n_cells, extent / n_cells, interleave, mark_fraction)


def _coverage(axis: np.ndarray, center: float, width: float, pitch: float) -> np.ndarray:
    """Fraction of each pixel covered by the interval [center +- width/2]."""
    lo = np.maximum(axis - pitch / 2, center - width / 2)
    hi = np.minimum(axis + pitch / 2, center + width / 2)
    return np.clip(hi - lo, 0.0, None) / pitch


def _mark_pixels(center: float, n_px: int, grid: int, pitch: float):
    """Pixel index range of a mark snapped to the grid, or None if outside.

    Half-up rounding: exact half-pixel ties must snap the same way in every
    cell or digit marks would sit on alternating lattices.
    """
    frac = center / pitch + (grid - 1) / 2  # cell center in pixel units
    start = int(np.floor(frac - n_px / 2 + 1.0))
    if start < 0 or start + n_px > grid:
        return None
    return start, start + n_px


def cells_to_field(cell_values, layout: CellLayout, grid: int, pixel_pitch: float,
                   wavelength: float) -> ComplexField:
    """Render per-cell amplitudes (cell 0 at the MSB corner) into a field.

    Marks are uniform squares snapped to whole pixels, every mark the same
    pixel count, so both the amplitude and the energy of a digit are exactly
    proportional to its value wherever its cell falls on the grid.
    """
    if len(cell_values) > layout.n_cells:
        raise ConfigurationError(
            f"{len(cell_values)} values exceed layout of {layout.n_cells} cells")
    if layout.n_cells * layout.cell_width > grid * pixel_pitch * (1 + 1e-9):
        raise ConfigurationError("cell layout exceeds the frame extent")
    samples = np.zeros((grid, grid))
    n_px = max(1, round(layout.mark_fraction * layout.cell_width / pixel_pitch))
    centers = layout.cell_centers()
    for c, v in enumerate(cell_values):
        if v == 0:
            continue
        cols = _mark_pixels(centers[c], n_px, grid, pixel_pitch)
        rows = _mark_pixels(-centers[c], n_px, grid, pixel_pitch)
        if cols is None or rows is None:
            raise ConfigurationError(
                f"cell {c} mark falls outside the {grid}-pixel frame")
        samples[rows[0]:rows[1], cols[0]:cols[1]] = v
    return ComplexField(samples.astype(np.complex128), pixel_pitch, wavelength)


def encode_diagonal(values, layout: CellLayout, grid: int, pixel_pitch: float,
                    wavelength: float) -> ComplexField:
    """Place digits (MSB first) along the diagonal as amplitude marks.

    Amplitudes are normalized to the largest digit; phase is zero everywhere.
    """
    values = tuple(values)
    if len(values) > layout.digit_capacity:
        raise ConfigurationError(
            f"{len(values)} digits exceed capacity {layout.digit_capacity}")
    peak = max(values) if values else 0
    cells = [0.0] * layout.n_cells
    for j, v in enumerate(values):
        if v < 0:
            raise ConfigurationError("digits must be non-negative")
        if peak:
            cells[j * layout.stride] = v / peak
    return cells_to_field(cells, layout, grid, pixel_pitch, wavelength)


def encode_banded(values, n_bands: int, grid: int, pixel_pitch: float,
                  wavelength: float) -> ComplexField:
    """Full-width horizontal bands, MSB on top, amplitude per digit value."""
    values = tuple(values)
    if len(values) > n_bands:
        raise ConfigurationError(f"{len(values)} digits exceed {n_bands} bands")
    peak = max(values) if values else 0
    samples = np.zeros((grid, grid))
    bounds = np.round(np.linspace(0, grid, n_bands + 1)).astype(int)
    for j, v in enumerate(values):
        if peak:
            samples[bounds[j]:bounds[j + 1], :] = v / peak
    return ComplexField(samples.astype(np.complex128), pixel_pitch, wavelength)


@dataclass(frozen=True)
class DetectorReadout:
    """Integrated cell energies and the digit vector fitted from them."""

    raw: tuple
    amplitudes: tuple
    fitted_scale: float
    digits: tuple
    offset: int
    max_abs_err: float | None = None
    rms_err: float | None = None

    def report(self) -> str:
        lines = [
            "raw = " + ",".join(f"{v:.6g}" for v in self.raw),
            "digits = " + ",".join(str(d) for d in self.digits),
            f"scale = {self.fitted_scale:.9g}",
            f"offset = {self.offset}",
        ]
        if self.max_abs_err is not None:
            lines.append(f"max_abs_err = {self.max_abs_err:.6g}")
            lines.append(f"rms_err = {self.rms_err:.6g}")
        return "\n".join(lines)


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5).astype(int)


def integrate_cells(img: IntensityImage, layout: CellLayout) -> np.ndarray:
    """Intensity integrated over each cell's readout window.

    Window edges are coverage-weighted (partial pixels count fractionally),
    so the integral does not jump when cell boundaries fall inside pixels.
    """
    n = img.samples.shape[0]
    x = (np.arange(n) - (n - 1) / 2) * img.pixel_pitch
    y = x[::-1]
    raw = np.empty(layout.n_cells)
    for c, center in enumerate(layout.cell_centers()):
        wx = _coverage(x, center, layout.window_width, img.pixel_pitch)
        wy = _coverage(y, center, layout.window_width, img.pixel_pitch)
        raw[c] = float(wy @ img.samples @ wx)
    return raw


def _fit_against_expected(amps: np.ndarray, expected: np.ndarray, stride: int):
    """Best anchor cell and least-squares scale for the expected digits."""
    span = stride * (len(expected) - 1) + 1
    best = None
    for offset in range(0, len(amps) - span + 1):
        a = amps[offset:offset + span:stride]
        denom = float(a @ a)
        if denom == 0:
            continue
        s = float(a @ expected) / denom
        resid = s * a - expected
        rms = float(np.sqrt(np.mean(resid * resid)))
        if best is None or rms < best[0] - 1e-15:
            best = (rms, offset, s, a)
    if best is None:
        raise DetectionError("dark image cannot match a nonzero expected vector")
    return best


def _blind_scale(amps: np.ndarray) -> float:
    """Smallest scale making the amplitudes closest to integers <= 2^12."""
    peak = amps.max()
    if peak == 0:
        return 1.0
    nz = amps[amps > peak * 1e-9]
    best_s, best_pen = 1.0 / peak, None
    for q in range(1, MAX_DIGIT + 1):
        s = q / peak
        scaled = s * nz
        pen = float(np.sum((scaled - np.round(scaled)) ** 2))
        if best_pen is None or pen < best_pen - 1e-12:
            best_s, best_pen = s, pen
            if pen < 1e-12:
                break
    return best_s


def detect(img: IntensityImage, layout: CellLayout,
           expected=None) -> DetectorReadout:
    """Integrate each cell, take amplitude square roots, and fit digits.

    With an expected vector: the scale is the least-squares fit of amplitudes
    to the expected digits (searched over anchor cells), and error metrics are
    reported. Without: the scale is the smallest value making all amplitudes
    near-integers within the 12-stop dynamic range.
    """
    raw = integrate_cells(img, layout)
    amps = np.sqrt(raw)
    stride = layout.stride
    if expected is not None:
        expected = np.asarray(tuple(expected), dtype=float)
        if stride * (len(expected) - 1) + 1 > layout.n_cells:
            raise ConfigurationError("expected vector exceeds layout span")
        if amps.max() == 0 and expected.any():
            raise DetectionError("dark image cannot match a nonzero expected vector")
        if not expected.any():
            fitted = amps[:len(expected) * stride:stride]
            return DetectorReadout(
                raw=tuple(raw), amplitudes=tuple(amps), fitted_scale=1.0,
                digits=tuple(int(d) for d in _round_half_up(fitted)), offset=0,
                max_abs_err=float(np.abs(fitted).max()),
                rms_err=float(np.sqrt(np.mean(fitted * fitted))))
        rms, offset, s, a = _fit_against_expected(amps, expected, stride)
        fitted = s * a
        digits = _round_half_up(fitted)
        err = fitted - expected
        return DetectorReadout(
            raw=tuple(raw), amplitudes=tuple(amps), fitted_scale=s,
            digits=tuple(int(d) for d in digits), offset=offset,
            max_abs_err=float(np.abs(err).max()), rms_err=rms)
    slots = amps[::stride]
    s = _blind_scale(slots)
    digits = _round_half_up(s * slots)
    return DetectorReadout(
        raw=tuple(raw), amplitudes=tuple(amps), fitted_scale=s,
        digits=tuple(int(d) for d in digits), offset=0)
