"""Backend selection for the direct-quadrature hot kernel.

The compiled (Cython/OpenMP) kernel is preferred when the extension built;
otherwise the numpy implementation is used. Both evaluate the same discrete
Fresnel sum. `bench` compares them side by side.
"""

from . import fresnel_py

try:
    from . import _fresnel_cy
except ImportError:  # extension not built; pure-Python install
    _fresnel_cy = None

fresnel_direct = _fresnel_cy.fresnel_direct if _fresnel_cy else fresnel_py.fresnel_direct

BACKEND = "compiled" if _fresnel_cy else "python"


def backend_name() -> str:
    return BACKEND


def implementations() -> dict:
    """All available direct-kernel implementations, for benchmarking."""
    impls = {"python": fresnel_py.fresnel_direct}
    if _fresnel_cy:
        impls["compiled"] = _fresnel_cy.fresnel_direct
    return impls
