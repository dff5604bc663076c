"""Per-lens timing of the propagation kernels.

One modeled lens = one quadratic phase + one propagation over the full grid,
which is where the simulation spends essentially all of its time. The direct
quadrature is measured for every available implementation (compiled and pure
Python) so the two can be compared; grids too large to run directly are
estimated from a smaller measurement by the O(N^4) work ratio.
"""

import time

import numpy as np

from . import _kernels
from .field import ComplexField
from .optics import apply_lens, LensSpec


DEFAULT_BENCH_PITCH = 0.001


def _test_field(n: int, wavelength: float = 0.0002) -> ComplexField:
    rng = np.random.default_rng(7)
    samples = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return ComplexField(samples, DEFAULT_BENCH_PITCH, wavelength)


def time_lens(n: int, backend: str, num_threads: int | None = None,
              repeats: int = 1) -> float:
    """Seconds for one lens stage (phase + propagation) on an n x n grid."""
    f = _test_field(n)
    spec = LensSpec(15.0, -15.0)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        apply_lens(f, spec, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best


def time_direct_kernel(n: int, impl, num_threads: int) -> float:
    f = _test_field(n)
    start = time.perf_counter()
    impl(f.samples, f.pixel_pitch, f.wavelength, 15.0, num_threads)
    return time.perf_counter() - start


def run_benchmark(grids=(250, 1005), num_threads: int | None = None,
                  direct_cap: int = 250) -> str:
    """Human-readable per-lens timing table across backends and grids."""
    import os
    threads = num_threads or os.cpu_count() or 1
    lines = [f"active direct backend: {_kernels.backend_name()}",
             f"threads: {threads}"]
    for n in grids:
        t_fft = time_lens(n, "fft")
        lines.append(f"grid {n}x{n}: fft path {t_fft:.3f} s/lens")
        for name, impl in _kernels.implementations().items():
            if n <= direct_cap:
                t = time_direct_kernel(n, impl, threads)
                lines.append(f"grid {n}x{n}: direct ({name}) {t:.3f} s/lens")
            else:
                base = min(direct_cap, 128)
                t_base = time_direct_kernel(base, impl, threads)
                est = t_base * (n / base) ** 4
                lines.append(
                    f"grid {n}x{n}: direct ({name}) est {est:.1f} s/lens "
                    f"(scaled O(N^4) from {base})")
    return "\n".join(lines)
