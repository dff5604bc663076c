"""Command-line interface.

Subcommands: run (execute an instruction file), scriptgen (emit a
modular-multiply program), modmul (print an arithmetic trace), crop-exp
(two-lens imaging fidelity), validate-aperture (direct kernel vs a
Fresnel-integral quadrature oracle), bench (per-lens timings).
"""

import argparse
import os
import sys

from . import bench as bench_mod
from .errors import OptomulError
from .montmul import (from_montgomery, montgomery_mul_conv,
                      montgomery_mul_exact_chain, montgomery_mul_hilo_chain,
                      montgomery_setup, to_montgomery)
from .optics import cropping_experiment
from .script import ScriptGeometry, execute, generate_modmul_script, parse_program

ENV_OUTPUT_DIR = "OPTOMUL_OUTPUT_DIR"


def _add_backend_args(p):
    p.add_argument("--backend", choices=("direct", "fft"), default="fft",
                   help="propagation kernel (default fft)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads for the direct kernel (default: all cores)")


def _geometry_args(p):
    p.add_argument("--grid", type=int, default=1005, help="grid size in pixels")
    p.add_argument("--cells", type=int, default=67, help="diagonal cell count")
    p.add_argument("--pitch", type=float, default=0.001, help="pixel pitch (mm)")
    p.add_argument("--wavelength", type=float, default=0.0002,
                   help="wavelength (mm)")
    p.add_argument("--separation", type=float, default=None,
                   help="lens spacing (mm); default derives from the grid")
    p.add_argument("--overlap", type=int, default=6, help="overlap digits")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optomul",
        description="Fourier-optics modular multiplication simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an instruction file")
    p_run.add_argument("program", help="path to the instruction file")
    p_run.add_argument("--output-dir", default=None,
                       help=f"override output directory (or ${ENV_OUTPUT_DIR})")
    p_run.add_argument("--tap-dir", default=None, help="override tap directory")
    p_run.add_argument("--expected-digits", default=None,
                       help="file with the expected detector digits, whitespace-separated")
    p_run.add_argument("--no-images", action="store_true",
                       help="skip writing tap/readout images")
    _add_backend_args(p_run)

    p_gen = sub.add_parser("scriptgen", help="emit a modular-multiply program")
    for flag in ("--a", "--b", "--m"):
        p_gen.add_argument(flag, type=int, required=True)
    _geometry_args(p_gen)
    p_gen.add_argument("--output-dir", default="output")
    p_gen.add_argument("--tap-dir", default="tap")
    p_gen.add_argument("--no-taps", action="store_true")

    p_mod = sub.add_parser("modmul", help="print a Montgomery multiplication trace")
    for flag in ("--a", "--b", "--m"):
        p_mod.add_argument(flag, type=int, required=True)
    p_mod.add_argument("--variant", choices=("exact", "hilo", "conv"),
                       default="exact")
    p_mod.add_argument("--overlap", type=int, default=6)

    p_crop = sub.add_parser("crop-exp", help="two-lens imaging fidelity")
    p_crop.add_argument("--lambda", dest="wavelength", type=float, default=0.0002)
    p_crop.add_argument("--focal", type=float, default=100.0)
    p_crop.add_argument("--crop", type=float, default=4.0)
    p_crop.add_argument("--grid", type=int, default=250)
    p_crop.add_argument("--extent", type=float, default=4.0)
    _add_backend_args(p_crop)

    p_val = sub.add_parser("validate-aperture",
                           help="direct kernel vs Fresnel-integral oracle")
    p_val.add_argument("--grid", type=int, default=128)
    p_val.add_argument("--threads", type=int, default=None)

    p_bench = sub.add_parser("bench", help="per-lens wall time per backend")
    p_bench.add_argument("--grid", type=int, action="append", default=None,
                         help="grid size (repeatable; default 250 and 1005)")
    p_bench.add_argument("--threads", type=int, default=None)
    p_bench.add_argument("--direct-cap", type=int, default=250,
                         help="largest grid to run the direct kernel on")
    return parser


def _read_expected(path):
    with open(path) as fh:
        return tuple(int(tok) for tok in fh.read().split())


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except OptomulError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.command == "run":
        with open(args.program) as fh:
            program = parse_program(fh.read())
        output_dir = args.output_dir or os.environ.get(ENV_OUTPUT_DIR)
        expected = {}
        if args.expected_digits:
            expected[0] = _read_expected(args.expected_digits)
        report = execute(program, backend=args.backend, num_threads=args.threads,
                         expected_digits=expected,
                         write_images=not args.no_images,
                         output_dir=output_dir, tap_dir=args.tap_dir)
        print(report.report(), end="")
        return 0

    if args.command == "scriptgen":
        geometry = ScriptGeometry(
            grid_size=args.grid, n_cells=args.cells, pixel_pitch=args.pitch,
            wavelength=args.wavelength, separation=args.separation,
            output_dir=args.output_dir, tap_dir=args.tap_dir,
            taps=not args.no_taps)
        gen = generate_modmul_script(args.a, args.b, args.m, geometry,
                                     overlap=args.overlap)
        print(gen.text, end="")
        return 0

    if args.command == "modmul":
        ctx = montgomery_setup(args.m)
        abar = to_montgomery(args.a, ctx)
        bbar = to_montgomery(args.b, ctx)
        print(f"m = {ctx.m}  k = {ctx.k}  r = {ctx.r}  M = {ctx.M}  R = {ctx.R}")
        print(f"abar = {abar}  bbar = {bbar}")
        if args.variant == "exact":
            chain = montgomery_mul_exact_chain(abar, bbar, ctx)
            for name in ("k1", "k2", "k3", "k4", "k5", "cbar"):
                print(f"{name} = {chain[name]}")
            cbar = chain["cbar"]
        elif args.variant == "hilo":
            chain = montgomery_mul_hilo_chain(abar, bbar, ctx)
            for name in ("k1", "k1_lo", "k1_hi", "k2", "k3", "k4", "k4_hi",
                         "k5_hi", "cbar"):
                print(f"{name} = {chain[name]}")
            cbar = chain["cbar"]
        else:
            cbar, trace = montgomery_mul_conv(abar, bbar, ctx, overlap=args.overlap)
            print(trace.report())
        print(f"c = {from_montgomery(cbar, ctx)}")
        return 0

    if args.command == "crop-exp":
        result = cropping_experiment(args.wavelength, args.focal, args.crop,
                                     grid=args.grid, extent=args.extent,
                                     backend=args.backend,
                                     num_threads=args.threads)
        print(f"wavelength = {result.wavelength}")
        print(f"focal_length = {result.focal_length}")
        print(f"crop_width = {result.crop_width}")
        print(f"fidelity = {result.fidelity:.6f}")
        return 0

    if args.command == "validate-aperture":
        from .validate import aperture_validation
        rel = aperture_validation(grid=args.grid, num_threads=args.threads)
        print(f"relative L2 error vs quadrature oracle: {rel:.3e}")
        return 0 if rel <= 1e-3 else 1

    if args.command == "bench":
        grids = tuple(args.grid) if args.grid else (250, 1005)
        print(bench_mod.run_benchmark(grids=grids, num_threads=args.threads,
                                      direct_cap=args.direct_cap))
        return 0

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
