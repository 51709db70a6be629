import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# The compiled kernel is optional at runtime; splitmax.kernels falls back to pure Python.
extensions = [
    Extension(
        "splitmax._ckernels",
        ["src/splitmax/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )
)
