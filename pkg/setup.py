import os

import numpy
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the accelerator extension if possible; fall back to pure Python."""

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # compiler missing, OpenMP unavailable, ...
            print(f"warning: skipping optional extension {ext.name}: {exc}")


def extensions():
    from Cython.Build import cythonize

    openmp = os.environ.get("OPTOMUL_NO_OPENMP") is None
    compile_args = ["-O3"]
    link_args = []
    if openmp:
        compile_args.append("-fopenmp")
        link_args.append("-fopenmp")
    ext = Extension(
        "optomul._kernels._fresnel_cy",
        ["src/optomul/_kernels/_fresnel_cy.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=compile_args,
        extra_link_args=link_args,
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
