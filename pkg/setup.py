"""Build the optional Cython kernel extension.

The extension is optional: if Cython or a compiler is missing the package
still installs and runs on the NumPy fallback kernels.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("AMSPLACE_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "amsplace.kernels._native",
                    ["src/amsplace/kernels/_native.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
