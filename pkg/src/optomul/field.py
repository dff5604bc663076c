"""Complex scalar fields on a square, centered grid, and the elementwise and
geometric primitives the optical devices are built from.

Pixel (i, j) of an N x N grid maps to physical coordinates
x = (j - (N-1)/2) * pitch, y = ((N-1)/2 - i) * pitch, so row 0 is the top of
the frame and the origin sits at the grid center. All values are immutable
after construction; operations return new instances.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, MetricError


def _centered_axis(n: int, pitch: float) -> np.ndarray:
    return (np.arange(n) - (n - 1) / 2) * pitch


@dataclass(frozen=True)
class ComplexField:
    """N x N complex amplitudes with physical pixel pitch (mm) and wavelength (mm)."""

    samples: np.ndarray
    pixel_pitch: float
    wavelength: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] < 2:
            raise ConfigurationError(f"grid must be square with N >= 2, got {s.shape}")
        if self.pixel_pitch <= 0:
            raise ConfigurationError(f"pixel pitch must be > 0, got {self.pixel_pitch}")
        if self.wavelength <= 0:
            raise ConfigurationError(f"wavelength must be > 0, got {self.wavelength}")
        if not np.all(np.isfinite(s.view(np.float64))):
            raise ConfigurationError("field contains non-finite samples")

    @property
    def grid_size(self) -> int:
        return self.samples.shape[0]

    @property
    def extent(self) -> float:
        """Physical side length of the frame in mm."""
        return self.grid_size * self.pixel_pitch

    def x_axis(self) -> np.ndarray:
        """Physical x coordinate of each pixel column center."""
        return _centered_axis(self.grid_size, self.pixel_pitch)

    def y_axis(self) -> np.ndarray:
        """Physical y coordinate of each pixel row center (row 0 on top)."""
        return -_centered_axis(self.grid_size, self.pixel_pitch)

    def with_samples(self, samples: np.ndarray) -> "ComplexField":
        return ComplexField(samples, self.pixel_pitch, self.wavelength)

    def mirrored(self) -> "ComplexField":
        """Point reflection through the origin (both axes flipped)."""
        return self.with_samples(self.samples[::-1, ::-1])

    @classmethod
    def zeros(cls, n: int, pixel_pitch: float, wavelength: float) -> "ComplexField":
        return cls(np.zeros((n, n), dtype=np.complex128), pixel_pitch, wavelength)


@dataclass(frozen=True)
class IntensityImage:
    """N x N non-negative intensities |field|^2 with the field's pixel pitch."""

    samples: np.ndarray
    pixel_pitch: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def mirrored(self) -> "IntensityImage":
        return IntensityImage(self.samples[::-1, ::-1], self.pixel_pitch)

    def to_pgm_bytes(self) -> bytes:
        """16-bit binary PGM (P5), big-endian, image max scaled to 65535."""
        s = self.samples
        peak = s.max()
        scale = 65535.0 / peak if peak > 0 else 1.0
        quantized = np.round(s * scale).astype(">u2")
        header = f"P5\n{s.shape[1]} {s.shape[0]}\n65535\n".encode("ascii")
        return header + quantized.tobytes()

    def to_raw_bytes(self) -> bytes:
        """Unscaled intensities as little-endian float64, row-major."""
        return self.samples.astype("<f8").tobytes()

    def write(self, path) -> None:
        """Write <path> as PGM plus a '<path>.raw' float sidecar."""
        path = str(path)
        with open(path, "wb") as fh:
            fh.write(self.to_pgm_bytes())
        with open(path + ".raw", "wb") as fh:
            fh.write(self.to_raw_bytes())


def read_raw_sidecar(path, n: int) -> np.ndarray:
    with open(str(path), "rb") as fh:
        data = fh.read()
    count = len(data) // 8
    vals = struct.unpack(f"<{count}d", data)
    return np.array(vals).reshape(n, n)


def _check_compatible(a: ComplexField, b: ComplexField):
    if a.samples.shape != b.samples.shape:
        raise ConfigurationError(
            f"grid mismatch: {a.samples.shape} vs {b.samples.shape}")
    if a.pixel_pitch != b.pixel_pitch:
        raise ConfigurationError(
            f"pixel pitch mismatch: {a.pixel_pitch} vs {b.pixel_pitch}")
    if a.wavelength != b.wavelength:
        raise ConfigurationError(
            f"wavelength mismatch: {a.wavelength} vs {b.wavelength}")


def pointwise_mul(a: ComplexField, b: ComplexField) -> ComplexField:
    """Elementwise complex product (the idealized spatial-light-modulator step)."""
    _check_compatible(a, b)
    return a.with_samples(a.samples * b.samples)


def pointwise_add(a: ComplexField, b: ComplexField) -> ComplexField:
    """Coherent elementwise sum (a beam combiner)."""
    _check_compatible(a, b)
    return a.with_samples(a.samples + b.samples)


def scale(f: ComplexField, gain: float) -> ComplexField:
    if not np.isfinite(gain):
        raise ConfigurationError(f"gain must be finite, got {gain}")
    return f.with_samples(f.samples * gain)


def mask_rect(f: ComplexField, corner1, corner2) -> ComplexField:
    """Zero all pixels outside the box spanned by two normalized corners.

    Corners are (x, y) fractions of the frame extent measured from the center,
    each in [-0.5, 0.5]. Bounding-box semantics: corner order is irrelevant.
    A pixel survives when its center lies inside the closed box.
    """
    for c in (*corner1, *corner2):
        if not -0.5 <= c <= 0.5:
            raise ConfigurationError(f"mask corner {c} outside [-0.5, 0.5]")
    x_lo, x_hi = sorted((corner1[0], corner2[0]))
    y_lo, y_hi = sorted((corner1[1], corner2[1]))
    xn = f.x_axis() / f.extent
    yn = f.y_axis() / f.extent
    keep_x = (xn >= x_lo) & (xn <= x_hi)
    keep_y = (yn >= y_lo) & (yn <= y_hi)
    keep = np.outer(keep_y, keep_x)
    return f.with_samples(np.where(keep, f.samples, 0))


def crop(f: ComplexField, width: float) -> ComplexField:
    """Zero all pixels outside the centered width x width square (mm)."""
    if width <= 0:
        raise ConfigurationError(f"crop width must be > 0, got {width}")
    half = width / 2
    keep_x = np.abs(f.x_axis()) <= half
    keep_y = np.abs(f.y_axis()) <= half
    keep = np.outer(keep_y, keep_x)
    return f.with_samples(np.where(keep, f.samples, 0))


def intensity(f: ComplexField) -> IntensityImage:
    return IntensityImage(np.abs(f.samples) ** 2, f.pixel_pitch)


def xcorr(a: IntensityImage, b: IntensityImage) -> float:
    """Normalized cross-correlation of mean-removed images, in [-1, 1]."""
    da = a.samples - a.samples.mean()
    db = b.samples - b.samples.mean()
    if da.shape != db.shape:
        raise ConfigurationError(f"shape mismatch: {da.shape} vs {db.shape}")
    na = np.sqrt((da * da).sum())
    nb = np.sqrt((db * db).sum())
    if na == 0 or nb == 0:
        raise MetricError("zero-variance image in cross-correlation")
    return float(np.clip((da * db).sum() / (na * nb), -1.0, 1.0))
