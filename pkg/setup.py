"""Build script: compiles the bisection kernel extension when Cython and a C
compiler are available.  The package works without it (pure-Python kernels are
selected at import time), just slower."""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "wpcs._kernels._core",
                ["src/wpcs/_kernels/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
