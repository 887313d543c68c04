"""Build script for the optional compiled kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile should not abort installation.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext = Extension(
        "blindmi._kernels._core",
        ["src/blindmi/_kernels/_core.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3", "-ffast-math"],
        # -ffast-math lets gcc emit calls into glibc's vector math library
        # (SIMD exp), which must then be linked explicitly.
        extra_link_args=["-lmvec", "-lm"],
    )
    ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
