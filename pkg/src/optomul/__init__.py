"""Fourier-optics simulation of digit-encoded multiplication, with exact
integer oracles for the carry-free convolutional Montgomery algorithm."""

from ._kernels import backend_name
from .field import (ComplexField, IntensityImage, crop, intensity, mask_rect,
                    pointwise_add, pointwise_mul, scale, xcorr)
from .montmul import (ConvTrace, MontgomeryContext, digit_add_carry_corrected,
                      digit_convolve, evaluate, from_montgomery, modmul,
                      montgomery_mul_conv, montgomery_mul_exact,
                      montgomery_mul_hilo, montgomery_setup, take_high,
                      take_low, to_digits, to_montgomery)
from .optics import (LensSpec, apply_lens, checkerboard, cropping_experiment,
                     fresnel_propagate_direct, fresnel_propagate_fft,
                     lens_phase, lens_spacing, propagate)
from .codec import CellLayout, DetectorReadout, detect, encode_banded, encode_diagonal
from .script import (GeneratedScript, Program, ScriptGeometry, execute,
                     generate_modmul_script, ideal_execute, parse_program)

__version__ = "0.1.0"
