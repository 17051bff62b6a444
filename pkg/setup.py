"""Build hook for the optional Cython oracle kernels.

The package is pure Python except for trapver._kernels._native, a small
bit-mask crunching module used by the Petri-net oracles.  If Cython or a C
compiler is unavailable the build still succeeds and the package falls back
to the pure-Python kernels at import time.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "trapver._kernels._native",
                ["src/trapver/_kernels/_native.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
