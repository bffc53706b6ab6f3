"""Build script for the optional compiled kernel core.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so build failures here are downgraded to warnings.
"""

import warnings

import numpy
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """build_ext that tolerates a missing or broken C toolchain."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            warnings.warn(f"compiled kernels not built ({exc}); using numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            warnings.warn(f"building {ext.name} failed ({exc}); using numpy fallback")


def extensions():
    from Cython.Build import cythonize

    ext = Extension(
        "hypothetica.kernels._compiled",
        ["src/hypothetica/kernels/_compiled.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
