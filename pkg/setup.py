"""Build script: compiles the optional Cython hot path.

The compiled extension is a pure speed-up; the package falls back to a
plain-Python evaluator at import time when the extension is missing.
Set COHMDI_NO_EXT=1 to skip compilation entirely.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("COHMDI_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("cohmdi._fastpath", ["src/cohmdi/_fastpath.pyx"])],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
