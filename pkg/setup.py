import os

import numpy as np
from setuptools import Extension, setup

# The compiled kernel is optional; FTFORMATION_NO_EXT=1 skips it and the
# numpy fallback is used at import time.
ext_modules = []
if not os.environ.get("FTFORMATION_NO_EXT"):
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "ftformation._kernels",
                ["src/ftformation/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
