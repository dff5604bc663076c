"""Instruction-file language: parser, executors, and the modular-multiply
script generator.

A program is a 4-line header (output dir, tap dir, wavelength in mm, grid
size in pixels) followed by device instructions, one per line except that
`generate` value lists may wrap. Lines starting with `#` are comments.

Beam references are positional: beams form an ordered list and an id names
the current 1-based position. `generate` and `beam_splitter` insert beams
(the splitter copy lands right after its source); `pointwise_mul`/`pointwise_add`
store into the first operand and remove the second, shifting later beams
down. This is the only reading under which the published device listings
resolve every reference.

Each lens line is one optical transform stage. A beam's accumulated lens
count tracks image mirroring: after an even count the beam is an image,
mirrored when count % 4 == 2 (two consecutive transforms flip the plane).
"""

import math
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from . import codec, field as fld, optics
from .errors import ConfigurationError, ScriptExecutionError, ScriptParseError
from .montmul import (ConvTrace, montgomery_mul_conv, montgomery_setup,
                      to_digits, to_montgomery)

DEFAULT_PITCH = 0.001  # mm; headers carry no pitch, captions fix 1 um

_KEYWORDS = ("generate", "tap", "lens", "pointwise_mul", "pointwise_add",
             "beam_splitter", "mask", "filter", "read_out", "detector", "pitch")


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Generate:
    meta: int
    n_cells: int
    values: tuple
    line: int = 0


@dataclass(frozen=True)
class Tap:
    line: int = 0


@dataclass(frozen=True)
class Lens:
    beam: int
    spec: optics.LensSpec
    line: int = 0


@dataclass(frozen=True)
class PointwiseMul:
    a: int
    b: int
    line: int = 0


@dataclass(frozen=True)
class PointwiseAdd:
    a: int
    b: int
    line: int = 0


@dataclass(frozen=True)
class BeamSplitter:
    a: int
    line: int = 0


@dataclass(frozen=True)
class Mask:
    a: int
    corner1: tuple
    corner2: tuple
    line: int = 0


@dataclass(frozen=True)
class Filter:
    a: int
    gain: float
    line: int = 0


@dataclass(frozen=True)
class ReadOut:
    a: int
    line: int = 0


@dataclass(frozen=True)
class Detector:
    a: int
    width: float
    n_cells: int
    line: int = 0


@dataclass(frozen=True)
class Pitch:
    value: float
    line: int = 0


@dataclass(frozen=True)
class Program:
    output_dir: str
    tap_dir: str
    wavelength: float
    grid_size: int
    instructions: tuple
    pixel_pitch: float = DEFAULT_PITCH

    def __post_init__(self):
        if self.wavelength <= 0:
            raise ScriptParseError(f"wavelength must be > 0, got {self.wavelength}")
        if self.grid_size < 2:
            raise ScriptParseError(f"grid size must be >= 2, got {self.grid_size}")
        if not self.instructions:
            raise ScriptParseError("program has no instructions")

    @property
    def extent(self) -> float:
        return self.grid_size * self.pixel_pitch


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _tokenize(text: str):
    """(token, line_number) pairs, comments stripped."""
    out = []
    for ln, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        for tok in stripped.split():
            out.append((tok, ln))
    return out


class _TokenStream:
    def __init__(self, pairs):
        self.pairs = pairs
        self.pos = 0

    def done(self) -> bool:
        return self.pos >= len(self.pairs)

    @property
    def line(self) -> int:
        idx = min(self.pos, len(self.pairs) - 1)
        return self.pairs[idx][1] if self.pairs else 0

    def next(self, what: str) -> str:
        if self.done():
            raise ScriptParseError(f"unexpected end of file, expected {what}",
                                   self.pairs[-1][1] if self.pairs else 0)
        tok, _ = self.pairs[self.pos]
        self.pos += 1
        return tok

    def number(self, what: str) -> float:
        tok = self.next(what)
        try:
            return float(tok)
        except ValueError:
            raise ScriptParseError(f"expected {what}, got {tok!r}", self.line) from None

    def integer(self, what: str) -> int:
        val = self.number(what)
        if val != int(val):
            raise ScriptParseError(f"expected integer {what}, got {val}", self.line)
        return int(val)

    def beam(self, what: str = "beam id") -> int:
        val = self.integer(what)
        if val < 1:
            raise ScriptParseError(f"{what} must be positive, got {val}", self.line)
        return val


def parse_program(text: str) -> Program:
    """Parse instruction-file text, with static beam-reference checking."""
    stream = _TokenStream(_tokenize(text))
    output_dir = stream.next("output directory")
    tap_dir = stream.next("tap directory")
    wavelength = stream.number("wavelength (mm)")
    grid_size = stream.integer("grid size (pixels)")

    instructions = []
    pixel_pitch = DEFAULT_PITCH
    while not stream.done():
        line = stream.line
        word = stream.next("instruction keyword")
        if word == "generate":
            meta = stream.integer("generate metadata")
            n_cells = stream.integer("generate cell count")
            if n_cells < 1:
                raise ScriptParseError(f"cell count must be >= 1, got {n_cells}", line)
            values = tuple(stream.number(f"generate value {i + 1} of {n_cells}")
                           for i in range(n_cells))
            instructions.append(Generate(meta, n_cells, values, line))
        elif word == "tap":
            instructions.append(Tap(line))
        elif word == "lens":
            beam = stream.beam()
            params = [stream.number(f"lens parameter {i + 1}") for i in range(7)]
            try:
                spec = optics.LensSpec(*params)
            except ConfigurationError as exc:
                raise ScriptParseError(str(exc), line) from None
            instructions.append(Lens(beam, spec, line))
        elif word == "pointwise_mul":
            instructions.append(PointwiseMul(stream.beam(), stream.beam(), line))
        elif word == "pointwise_add":
            instructions.append(PointwiseAdd(stream.beam(), stream.beam(), line))
        elif word == "beam_splitter":
            instructions.append(BeamSplitter(stream.beam(), line))
        elif word == "mask":
            beam = stream.beam()
            c = [stream.number(f"mask coordinate {i + 1}") for i in range(4)]
            for v in c:
                if not -0.5 <= v <= 0.5:
                    raise ScriptParseError(
                        f"mask coordinate {v} outside [-0.5, 0.5]", line)
            instructions.append(Mask(beam, (c[0], c[1]), (c[2], c[3]), line))
        elif word == "filter":
            instructions.append(Filter(stream.beam(), stream.number("filter gain"), line))
        elif word == "read_out":
            instructions.append(ReadOut(stream.beam(), line))
        elif word == "detector":
            beam = stream.beam()
            width = stream.number("detector width (mm)")
            n_cells = stream.integer("detector cell count")
            if width <= 0 or n_cells < 1:
                raise ScriptParseError("detector needs width > 0 and cells >= 1", line)
            instructions.append(Detector(beam, width, n_cells, line))
        elif word == "pitch":
            pixel_pitch = stream.number("pixel pitch (mm)")
            if pixel_pitch <= 0:
                raise ScriptParseError(f"pixel pitch must be > 0, got {pixel_pitch}", line)
            instructions.append(Pitch(pixel_pitch, line))
        else:
            raise ScriptParseError(f"unknown keyword {word!r}", line)

    program = Program(output_dir, tap_dir, wavelength, grid_size,
                      tuple(instructions), pixel_pitch)
    _check_beam_references(program)
    return program


def _check_beam_references(program: Program):
    """Static walk of the beam list: every referenced position must be live."""
    live = 0

    def check(ins, *ids):
        for i in ids:
            if not 1 <= i <= live:
                raise ScriptParseError(
                    f"beam {i} not live ({live} beams exist)", ins.line)

    for ins in program.instructions:
        if isinstance(ins, Generate):
            live += 1
        elif isinstance(ins, Lens):
            check(ins, ins.beam)
        elif isinstance(ins, (PointwiseMul, PointwiseAdd)):
            check(ins, ins.a, ins.b)
            if ins.a == ins.b:
                raise ScriptParseError("operands must be distinct beams", ins.line)
            live -= 1
        elif isinstance(ins, BeamSplitter):
            check(ins, ins.a)
            live += 1
        elif isinstance(ins, Mask):
            check(ins, ins.a)
        elif isinstance(ins, Filter):
            check(ins, ins.a)
        elif isinstance(ins, ReadOut):
            check(ins, ins.a)
        elif isinstance(ins, Detector):
            check(ins, ins.a)


def emit_program(program: Program) -> str:
    """Serialize a Program back to instruction-file text."""
    lines = [program.output_dir, program.tap_dir,
             f"{program.wavelength:.6f}", str(program.grid_size)]
    for ins in program.instructions:
        if isinstance(ins, Generate):
            vals = " ".join(_fmt_value(v) for v in ins.values)
            lines.append(f"generate {ins.meta} {ins.n_cells} {vals}")
        elif isinstance(ins, Tap):
            lines.append("tap")
        elif isinstance(ins, Lens):
            s = ins.spec
            lines.append("lens {} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f}"
                         .format(ins.beam, s.distance_after, s.focal_length,
                                 s.refractive_index, s.thickness, s.aperture,
                                 s.scale_x, s.scale_y))
        elif isinstance(ins, PointwiseMul):
            lines.append(f"pointwise_mul {ins.a} {ins.b}")
        elif isinstance(ins, PointwiseAdd):
            lines.append(f"pointwise_add {ins.a} {ins.b}")
        elif isinstance(ins, BeamSplitter):
            lines.append(f"beam_splitter {ins.a}")
        elif isinstance(ins, Mask):
            lines.append("mask {} {:.6f} {:.6f} {:.6f} {:.6f}".format(
                ins.a, ins.corner1[0], ins.corner1[1],
                ins.corner2[0], ins.corner2[1]))
        elif isinstance(ins, Filter):
            lines.append(f"filter {ins.a} {_fmt_value(ins.gain)}")
        elif isinstance(ins, ReadOut):
            lines.append(f"read_out {ins.a}")
        elif isinstance(ins, Detector):
            lines.append(f"detector {ins.a} {ins.width:.6f} {ins.n_cells}")
        elif isinstance(ins, Pitch):
            lines.append(f"pitch {ins.value:.6f}")
    return "\n".join(lines) + "\n"


def _fmt_value(v: float) -> str:
    return str(int(v)) if float(v) == int(v) else f"{v:g}"


# ---------------------------------------------------------------------------
# optical executor
# ---------------------------------------------------------------------------

@dataclass
class _Beam:
    field: fld.ComplexField
    lens_count: int = 0

    @property
    def mirrored(self) -> bool:
        return self.lens_count % 4 == 2


@dataclass
class ExecutionReport:
    readouts: list = dc_field(default_factory=list)  # (step, DetectorReadout)
    step_times: list = dc_field(default_factory=list)  # (step, keyword, seconds)
    tap_files: list = dc_field(default_factory=list)
    readout_files: list = dc_field(default_factory=list)

    def report(self) -> str:
        lines = []
        for step, keyword, seconds in self.step_times:
            lines.append(f"step {step} {keyword} {seconds:.6f}s")
        for step, readout in self.readouts:
            lines.append(f"detector at step {step}")
            lines.append(readout.report())
        return "\n".join(lines) + "\n"


def execute(program: Program, backend: str = "fft", num_threads: int | None = None,
            expected_digits: dict | None = None, write_images: bool = True,
            output_dir=None, tap_dir=None) -> ExecutionReport:
    """Run a program sequentially, writing tap/readout images as instructed.

    expected_digits maps detector ordinal (0-based, in program order) to the
    digit vector the detector readout is fitted against.
    """
    expected_digits = expected_digits or {}
    out_dir = Path(output_dir if output_dir is not None else program.output_dir)
    taps = Path(tap_dir if tap_dir is not None else program.tap_dir)
    beams: list[_Beam] = []
    report = ExecutionReport()
    detector_ordinal = 0

    def get(ref: int, step: int) -> _Beam:
        if not 1 <= ref <= len(beams):
            raise ScriptExecutionError(
                f"beam {ref} not live ({len(beams)} beams exist)", step)
        return beams[ref - 1]

    for step, ins in enumerate(program.instructions, start=1):
        started = time.perf_counter()
        if isinstance(ins, Generate):
            layout = codec.CellLayout.spanning(ins.n_cells, program.extent)
            # value lists run from the LSB corner; cell 0 is the MSB corner
            beam_field = codec.cells_to_field(
                tuple(reversed(ins.values)), layout, program.grid_size,
                program.pixel_pitch, program.wavelength)
            beams.append(_Beam(beam_field))
        elif isinstance(ins, Tap):
            if write_images:
                taps.mkdir(parents=True, exist_ok=True)
                for pos, beam in enumerate(beams, start=1):
                    path = taps / f"tap_{step:03d}_beam_{pos}.pgm"
                    fld.intensity(beam.field).write(path)
                    report.tap_files.append(str(path))
        elif isinstance(ins, Lens):
            beam = get(ins.beam, step)
            beam.field = optics.apply_lens(beam.field, ins.spec, backend=backend,
                                           num_threads=num_threads)
            beam.lens_count += 1
        elif isinstance(ins, PointwiseMul):
            a = get(ins.a, step)
            b = get(ins.b, step)
            a.field = fld.pointwise_mul(a.field, b.field)
            del beams[ins.b - 1]
        elif isinstance(ins, PointwiseAdd):
            a = get(ins.a, step)
            b = get(ins.b, step)
            a.field = fld.pointwise_add(a.field, b.field)
            del beams[ins.b - 1]
        elif isinstance(ins, BeamSplitter):
            src = get(ins.a, step)
            beams.insert(ins.a, _Beam(src.field, src.lens_count))
        elif isinstance(ins, Mask):
            beam = get(ins.a, step)
            beam.field = fld.mask_rect(beam.field, ins.corner1, ins.corner2)
        elif isinstance(ins, Filter):
            beam = get(ins.a, step)
            beam.field = fld.scale(beam.field, ins.gain)
        elif isinstance(ins, ReadOut):
            beam = get(ins.a, step)
            if write_images:
                out_dir.mkdir(parents=True, exist_ok=True)
                path = out_dir / f"readout_beam_{ins.a}.pgm"
                fld.intensity(beam.field).write(path)
                report.readout_files.append(str(path))
        elif isinstance(ins, Detector):
            beam = get(ins.a, step)
            width = min(ins.width, beam.field.extent)
            layout = codec.CellLayout(ins.n_cells, width / ins.n_cells,
                                      interleave=True)
            img = fld.intensity(beam.field)
            if beam.mirrored:
                img = img.mirrored()
            readout = codec.detect(img, layout,
                                   expected=expected_digits.get(detector_ordinal))
            report.readouts.append((step, readout))
            detector_ordinal += 1
        elif isinstance(ins, Pitch):
            pass  # applied when the Program was built
        report.step_times.append((step, type(ins).__name__.lower(),
                                  time.perf_counter() - started))
    return report

# ---------------------------------------------------------------------------
# ideal (digit-vector) executor
# ---------------------------------------------------------------------------

@dataclass
class _IdealBeam:
    """Cell values on the diagonal lattice, by integer offset from center."""
    cells: dict
    in_transform: bool = False
    lens_count: int = 0


def _flip_cells(cells: dict) -> dict:
    return {-p: v for p, v in cells.items()}


def ideal_execute(program: Program) -> "IdealReport":
    """Run a program with exact digit-vector device semantics.

    Beams hold integer cell values instead of fields; a lens toggles between
    the spatial and transform domains (a completed pair mirrors the plane),
    a pointwise multiply convolves cell values (positions add), masks select
    cell windows, and adds sum aligned cells. Separates script-structure
    errors from optical-resolution errors.
    """
    n_cells = None
    beams: list[_IdealBeam] = []
    snapshots = []
    detectors = []

    def get(ref, step):
        if not 1 <= ref <= len(beams):
            raise ScriptExecutionError(f"beam {ref} not live", step)
        return beams[ref - 1]

    for step, ins in enumerate(program.instructions, start=1):
        if isinstance(ins, Generate):
            if n_cells is None:
                n_cells = ins.n_cells
            half = (ins.n_cells - 1) / 2
            cells = {}
            for idx, v in enumerate(ins.values):
                if v:
                    cells[idx - half] = v
            beams.append(_IdealBeam(cells))
        elif isinstance(ins, Lens):
            beam = get(ins.beam, step)
            if beam.in_transform:
                beam.cells = _flip_cells(beam.cells)
            beam.in_transform = not beam.in_transform
            beam.lens_count += 1
        elif isinstance(ins, PointwiseMul):
            a = get(ins.a, step)
            b = get(ins.b, step)
            if not (a.in_transform and b.in_transform):
                raise ScriptExecutionError(
                    "pointwise_mul outside the transform domain", step)
            out = {}
            for pa, va in a.cells.items():
                for pb, vb in b.cells.items():
                    out[pa + pb] = out.get(pa + pb, 0) + va * vb
            a.cells = out
            del beams[ins.b - 1]
        elif isinstance(ins, PointwiseAdd):
            a = get(ins.a, step)
            b = get(ins.b, step)
            if a.in_transform or b.in_transform:
                raise ScriptExecutionError(
                    "pointwise_add outside the image domain", step)
            for p, v in b.cells.items():
                a.cells[p] = a.cells.get(p, 0) + v
            del beams[ins.b - 1]
        elif isinstance(ins, BeamSplitter):
            src = get(ins.a, step)
            beams.insert(ins.a, _IdealBeam(dict(src.cells), src.in_transform,
                                           src.lens_count))
        elif isinstance(ins, Mask):
            beam = get(ins.a, step)
            if beam.in_transform:
                raise ScriptExecutionError("mask in the transform domain", step)
            x_lo, x_hi = sorted((ins.corner1[0], ins.corner2[0]))
            y_lo, y_hi = sorted((ins.corner1[1], ins.corner2[1]))
            lo = max(x_lo, y_lo)
            hi = min(x_hi, y_hi)
            beam.cells = {p: v for p, v in beam.cells.items()
                          if lo <= p / n_cells <= hi}
        elif isinstance(ins, Filter):
            beam = get(ins.a, step)
            beam.cells = {p: v * ins.gain for p, v in beam.cells.items()}
        elif isinstance(ins, Detector):
            beam = get(ins.a, step)
            cells = beam.cells
            if beam.lens_count % 4 == 2:
                cells = _flip_cells(cells)
            detectors.append(dict(cells))
        elif isinstance(ins, (Tap, ReadOut, Pitch)):
            pass
        if beams:
            snapshots.append((step, [dict(b.cells) for b in beams]))
    return IdealReport(snapshots=snapshots, detectors=detectors)


@dataclass
class IdealReport:
    snapshots: list
    detectors: list

    def stage_seen(self, vector, stride: int = 2) -> bool:
        """True if some beam at some step held exactly this digit vector."""
        for _, beams in self.snapshots:
            for cells in beams:
                if cells_equal_vector(cells, vector, stride):
                    return True
        return False


def cells_equal_vector(cells: dict, vector, stride: int = 2) -> bool:
    """Exact match of a cell map against an MSB-first digit vector.

    The vector may sit anywhere on the stride lattice, in either orientation
    (significance ascending or descending with position); cells outside the
    window must be zero.
    """
    vec = tuple(vector)
    nonzero = {p: v for p, v in cells.items() if v}
    if not nonzero:
        return all(v == 0 for v in vec)
    positions = sorted(nonzero)
    lsb_candidates = set()
    for p in positions:
        for j in range(len(vec)):
            lsb_candidates.add(p - stride * j)
    for orientation in (vec, vec[::-1]):
        for lsb in lsb_candidates:
            window = {lsb + stride * j: orientation[len(vec) - 1 - j]
                      for j in range(len(vec))}
            if all(cells.get(p, 0) == v for p, v in window.items()) and \
                    all(p in window for p in nonzero):
                return True
    return False

# ---------------------------------------------------------------------------
# script generator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScriptGeometry:
    """Physical parameters of a generated modular-multiply device."""

    grid_size: int = 1005
    n_cells: int = 67
    pixel_pitch: float = DEFAULT_PITCH
    wavelength: float = 0.0002
    separation: float | None = None  # lens spacing (mm); None = 3x critical
    output_dir: str = "output"
    tap_dir: str = "tap"
    taps: bool = True

    @property
    def extent(self) -> float:
        return self.grid_size * self.pixel_pitch

    def lens_separation(self) -> float:
        if self.separation is not None:
            return self.separation
        # transform-plane alias spacing = 3x the frame, the published margin
        return 3.0 * self.extent * self.pixel_pitch / self.wavelength


@dataclass(frozen=True)
class GeneratedScript:
    text: str
    program: Program
    trace: ConvTrace
    geometry: ScriptGeometry

    @property
    def expected_digits(self) -> tuple:
        """Digit vector the final detector should read (MSB first)."""
        return self.trace.k5_hi


def _interleave(digits_lsb_first, anchor: float, direction: int, half: int) -> dict:
    """Place digits on the cell lattice: digit s at anchor + direction*2*s."""
    cells = {}
    for s, v in enumerate(digits_lsb_first):
        p = anchor + direction * 2 * s
        if abs(p) > half:
            raise ConfigurationError(
                f"digit cell {p} outside layout half-width {half}; "
                "increase the cell count")
        if v:
            cells[p] = v
    return cells


def _cells_to_values(cells: dict, n_cells: int) -> tuple:
    half = (n_cells - 1) // 2
    vals = [0] * n_cells
    for p, v in cells.items():
        vals[int(p) + half] = v
    return tuple(vals)


def generate_modmul_script(a: int, b: int, m: int, geometry: ScriptGeometry = None,
                           overlap: int = 6) -> GeneratedScript:
    """Emit the eight-beam device program computing a*b mod m optically.

    The device receives the operands already in the Montgomery domain, runs
    the carry-free convolutional chain (five transform multiplies, window
    masks for the high/low splits, a dedicated carry beam, and two multiplies
    by one that equalize path phase and blur), and reads the high sum off the
    final detector. Digits sit on every other diagonal cell with guard cells
    between; mask boundaries land on guard-cell centers, as fractions
    q/n_cells of the frame.
    """
    geometry = geometry or ScriptGeometry()
    n = geometry.n_cells
    if n % 2 == 0:
        raise ConfigurationError("cell count must be odd (centered layout)")
    half = (n - 1) // 2
    ctx = montgomery_setup(m)
    if a < 0 or b < 0:
        raise ConfigurationError("operands must be non-negative")
    abar = to_montgomery(a, ctx)
    bbar = to_montgomery(b, ctx)
    overlap = min(overlap, ctx.k - 1)
    _, trace = montgomery_mul_conv(abar, bbar, ctx, overlap=overlap)

    kk = ctx.k
    la, lb = len(trace.abar), len(trace.bbar)
    lm, lM = len(trace.m_digits), len(trace.M_digits)

    # LSB anchors on the diagonal lattice (positive offsets toward the MSB
    # corner); convolution adds positions, each completed transform pair
    # negates them. Boundaries fall between the digit windows of the
    # high/low splits.
    a0 = 1
    b0 = -(2 * lb + 1)
    k1_lsb = -(a0 + b0)                      # k1 digit s at k1_lsb - 2s
    q_hi = k1_lsb - 2 * (kk - overlap - 1) + 1
    q_lo = k1_lsb - 2 * (kk - 1) - 1
    c2 = -(kk + lM - 2)                      # k2 digit s at c2 + 2s
    mu0 = -c2 - k1_lsb                       # M* digit s at mu0 - 2s
    q3 = c2 + 2 * (kk - 1) + 1
    m0 = -c2 - (kk + lm - 2)                 # m digit s at m0 + 2s
    c4 = kk + lm - 2                         # k4 digit s at c4 - 2s
    q4 = c4 - 2 * (kk - overlap - 1) + 1
    carry_pos = k1_lsb - 2 * (kk - 1)        # the +1 lands at weight 2^(k-1)
    u_carry_a, u_carry_b = -carry_pos, 0     # positions add, then negate
    u_shift_a, u_shift_b = c4 - k1_lsb, 0    # aligns the high sum with k4

    def rev(digits):
        return tuple(reversed(digits))

    beams = [
        _interleave(rev(trace.abar), a0, +1, half),
        _interleave(rev(trace.bbar), b0, +1, half),
        _interleave(rev(trace.M_digits), mu0, -1, half),
        _interleave(rev(trace.m_digits), m0, +1, half),
        _interleave((1,), u_carry_a, +1, half),
        _interleave((1,), u_carry_b, +1, half),
        _interleave((1,), u_shift_a, +1, half),
        _interleave((1,), u_shift_b, +1, half),
    ]

    sep = geometry.lens_separation()
    extent = geometry.extent
    aperture = max(15.0, 2.0 * extent)

    def lens(beam, kind):
        focal = {"fresh": sep, "forward": sep / 2, "inverse": sep / 3}[kind]
        spec = optics.LensSpec(sep, -focal, 1.5, 2.0, aperture, 1.0, 1.0)
        return Lens(beam, spec)

    def mask_lower_left(beam, q):
        hi = max(min(q / n, 0.5), -0.5)
        return Mask(beam, (-0.5, hi), (hi, -0.5))

    def mask_upper_right(beam, q):
        lo = max(min(q / n, 0.5), -0.5)
        return Mask(beam, (lo, 0.5), (0.5, lo))

    ins = []
    for idx, cells in enumerate(beams):
        digit_count = (la, lb, lM, lm, 1, 1, 1, 1)[idx]
        ins.append(Generate(digit_count, n, _cells_to_values(cells, n)))

    def tap():
        if geometry.taps:
            ins.append(Tap())

    tap()
    ins += [lens(1, "fresh"), lens(2, "fresh")]
    tap()
    ins += [PointwiseMul(1, 2), lens(1, "inverse")]
    tap()
    ins += [BeamSplitter(1), mask_lower_left(1, q_hi), mask_upper_right(2, q_lo)]
    tap()
    ins += [lens(2, "forward"), lens(3, "fresh")]
    tap()
    ins += [PointwiseMul(2, 3), lens(2, "inverse")]
    tap()
    ins += [mask_lower_left(2, q3)]
    tap()
    ins += [lens(2, "forward"), lens(3, "fresh")]
    tap()
    ins += [PointwiseMul(2, 3), lens(2, "inverse")]
    tap()
    ins += [mask_lower_left(2, q4)]
    tap()
    ins += [lens(3, "fresh"), lens(4, "fresh")]
    tap()
    ins += [PointwiseMul(3, 4), lens(3, "inverse")]
    tap()
    ins += [Filter(3, 1.0)]
    tap()
    ins += [PointwiseAdd(1, 3)]
    tap()
    ins += [lens(1, "forward"), lens(3, "fresh")]
    tap()
    ins += [PointwiseMul(1, 3), lens(1, "inverse")]
    tap()
    ins += [lens(1, "forward"), lens(3, "fresh")]
    tap()
    ins += [PointwiseMul(1, 3), lens(1, "inverse")]
    tap()
    ins += [PointwiseAdd(1, 2)]
    tap()
    ins += [lens(1, "forward"), lens(1, "forward")]
    tap()
    ins += [ReadOut(1), Detector(1, extent, n)]

    if geometry.pixel_pitch != DEFAULT_PITCH:
        ins.insert(0, Pitch(geometry.pixel_pitch))

    program = Program(geometry.output_dir, geometry.tap_dir, geometry.wavelength,
                      geometry.grid_size, tuple(ins), geometry.pixel_pitch)
    text = emit_program(program)
    parsed = parse_program(text)  # round-trip guarantee
    return GeneratedScript(text=text, program=parsed, trace=trace,
                           geometry=geometry)
