"""Build script for the compiled attention kernels.

The package works without the extension (a pure-numpy fallback is selected
at import time), so a missing Cython toolchain degrades the build instead
of failing it.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "addrlink.model._kernels",
                ["src/addrlink/model/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
