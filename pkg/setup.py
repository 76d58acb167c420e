"""Build script for the optional compiled decode kernel.

The package works without the extension (a NumPy fallback is selected at
import); building it just makes large simulation sweeps faster.
"""

import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension(
        "bloomsig._decode_cy",
        ["src/bloomsig/_decode_cy.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
