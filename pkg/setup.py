import os

from setuptools import setup

ext_modules = []
if not os.environ.get("PG3FLOWS_PURE_PYTHON"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/pg3flows/_kernels/fastback.pyx"],
            language_level=3,
        )
    except ImportError:
        # the pure-python backend is a full functional fallback
        ext_modules = []

setup(ext_modules=ext_modules)
