import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "flowtriage.explain._treeshap",
                ["src/flowtriage/explain/_treeshap.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level="3",
    )
except ImportError:
    # Pure-Python kernel is selected at import time when the extension
    # is unavailable; the package still installs and works.
    ext_modules = []

setup(ext_modules=ext_modules)
