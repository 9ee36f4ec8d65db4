"""Build script for the optional compiled aggregation kernel.

The package is pure Python except for one hot loop: accumulating boarding,
alighting, flux, and transfer fields over the N^4 origin-destination space.
If Cython (and a C compiler) are available the kernel is compiled; otherwise
the install still succeeds and the vectorized NumPy fallback is used.
"""

from setuptools import setup
from setuptools.extension import Extension

extensions = []
try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "gridtransit._agg_cy",
                sources=["src/gridtransit/_agg_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )

setup(ext_modules=extensions)
