"""Build script for the optional Cython correlation kernels.

The package works without the extension (a pure-NumPy fallback is selected
at import time); building it just makes subset correlation much faster.
"""

import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None and os.path.exists("src/strainlab/dic/_icgn.pyx"):
    ext_modules = cythonize(
        [
            Extension(
                "strainlab.dic._icgn",
                ["src/strainlab/dic/_icgn.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
