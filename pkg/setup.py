"""Build script for the optional compiled kernels.

The package is fully functional without the extension: geocube._kernels
falls back to pure numpy implementations at import time.  Set
GEOCUBE_SKIP_CYTHON=1 to force a pure-python install.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("GEOCUBE_SKIP_CYTHON"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "geocube._kernels._core",
                    ["src/geocube/_kernels/_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
