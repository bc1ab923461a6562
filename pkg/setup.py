"""Build script for the optional compiled filtering kernels.

The package works without the extension: ``nsregimes.statespace`` falls back
to the pure-NumPy kernels in ``nsregimes._core_py`` when the compiled module
is missing (or when NSREGIMES_PURE_PYTHON=1 is set).
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "nsregimes._core",
        ["src/nsregimes/_core.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
