# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled direct Fresnel quadrature: the literal double sum over source
pixels, parallelized over output pixels. Each output pixel accumulates its
sum in a fixed sequential order, so results are bit-identical for any thread
count."""

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport cos, sin

cnp.import_array()


def fresnel_direct(const double complex[:, ::1] u, double pitch, double wavelength,
                   double z, int num_threads):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i1, j1, i0, j0, di, dj
    cdef double coef = np.pi / (wavelength * z)
    cdef double phase

    # 1-D displacement table: exp(-i k/(2z) (d*pitch)^2) for d in [-(n-1), n-1]
    table_arr = np.empty(2 * n - 1, dtype=np.complex128)
    cdef double complex[::1] table = table_arr
    for di in range(2 * n - 1):
        phase = -coef * ((di - (n - 1)) * pitch) ** 2
        table[di] = cos(phase) + 1j * sin(phase)

    out_arr = np.empty((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef double complex acc, row_factor
    if num_threads < 1:
        num_threads = 1

    for i1 in prange(n, nogil=True, schedule="static", num_threads=num_threads):
        for j1 in range(n):
            acc = 0
            for i0 in range(n):
                row_factor = table[i0 - i1 + n - 1]
                for j0 in range(n):
                    acc = acc + u[i0, j0] * row_factor * table[j0 - j1 + n - 1]
            out[i1, j1] = acc

    pref = (-1.0 / (1j * wavelength * z)) * np.exp(-2j * np.pi * z / wavelength)
    return (pref * pitch * pitch) * out_arr
