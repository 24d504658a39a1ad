"""Build script for the optional compiled projector kernel.

The package is fully functional without the extension; a pure NumPy
implementation is selected at import time if the compiled module is
missing. Any build failure therefore degrades to a warning instead of
aborting the install.
"""

import warnings

from setuptools import setup


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError as exc:
        warnings.warn(f"compiled kernel skipped ({exc}); using pure NumPy fallback")
        return []
    ext = Extension(
        "algqst.kernels._fusion_cy",
        sources=["src/algqst/kernels/_fusion_cy.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=_extensions())
