import os

import numpy as np
from setuptools import setup

ext_modules = []
if os.environ.get("ZETAGOF_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            "src/zetagof/_ckernels.pyx",
            compiler_directives={"language_level": 3, "embedsignature": True},
        )
        for e in ext_modules:
            e.include_dirs.append(np.get_include())
            e.define_macros.append(("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION"))

setup(ext_modules=ext_modules)
