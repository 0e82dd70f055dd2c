"""Build script for the optional Cython co-occurrence kernel.

The package works without the extension (a pure-Python fallback is
selected at import time); the kernel only accelerates window-pair
counting on long documents.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    ext = Extension(
        "graphkpe._cooc_cy",
        sources=["src/graphkpe/_cooc_cy.pyx"],
        language="c++",
        include_dirs=[numpy.get_include()],
        optional=True,
    )
    extensions = cythonize([ext], language_level=3)

setup(ext_modules=extensions)
