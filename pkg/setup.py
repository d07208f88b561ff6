"""Build hooks for the optional compiled chord kernel.

The package is pure Python plus one optional Cython extension. If Cython or a
C compiler is unavailable the build still succeeds and the package falls back
to the numpy kernel at import time.
"""
from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "hilbertflow._chords_cy",
                ["src/hilbertflow/_chords_cy.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
