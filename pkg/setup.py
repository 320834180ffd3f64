"""Build script for the optional compiled recursion kernel.

The package works without the extension (a NumPy fallback is selected at
import time); building it just makes the hot loop faster.  Install with
``pip install -e . --no-build-isolation``.
"""
from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "contagio._recursion_cy",
                ["src/contagio/_recursion_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
