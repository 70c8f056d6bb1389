"""Build shim for the optional Cython kernel.

The package works without the extension: twoway.kernels falls back to the
pure-Python implementation when the compiled module is absent or fails to
import. Set TWOWAY_SKIP_EXT=1 to skip building the extension entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("TWOWAY_SKIP_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/twoway/_kernels.pyx"],
            language_level=3,
        )
        include_dirs = [numpy.get_include()]
        for ext in ext_modules:
            ext.include_dirs = include_dirs
    except Exception:
        ext_modules = []

setup(ext_modules=ext_modules)
