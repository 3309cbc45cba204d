"""Build script: compiles the optional Cython core.

The package works without the extension (a numpy/LAPACK fallback is selected at
import time), so any failure here downgrades to a pure-python build instead of
aborting the install.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "cmakit._core._recursions",
                ["src/cmakit/_core/_recursions.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # Cython or a C compiler is missing
    print(f"cmakit: skipping compiled core ({exc!r}); using pure-python fallback")

setup(ext_modules=ext_modules)
