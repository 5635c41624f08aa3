"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure-Python fallback is selected
at import time); building it just makes the hot loops fast.
"""

from setuptools import Extension, setup

DIRECTIVES = {
    "language_level": 3,
    "boundscheck": False,
    "wraparound": False,
    "cdivision": True,
}


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "tempens._kernels",
        sources=["src/tempens/_kernels.pyx"],
        optional=True,
    )
    return cythonize([ext], compiler_directives=DIRECTIVES)


setup(ext_modules=_extensions())
