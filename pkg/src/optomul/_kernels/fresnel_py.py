"""Pure-numpy direct Fresnel quadrature.

Same discrete double sum as the compiled kernel, evaluated through the
separable form out = A @ u @ A.T (the quadratic-phase kernel factorizes per
axis, and the centered y axis has the same pairwise differences as x). Result
matches the literal quadruple loop up to floating-point reassociation.
"""

import numpy as np


def fresnel_direct(u: np.ndarray, pitch: float, wavelength: float, z: float,
                   num_threads: int = 1) -> np.ndarray:
    n = u.shape[0]
    x = (np.arange(n) - (n - 1) / 2) * pitch
    diff = x[:, None] - x[None, :]
    a = np.exp((-1j * np.pi / (wavelength * z)) * diff * diff)
    pref = (-1.0 / (1j * wavelength * z)) * np.exp(-2j * np.pi * z / wavelength)
    return (pref * pitch * pitch) * (a @ np.ascontiguousarray(u) @ a.T)
