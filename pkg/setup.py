import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# The compiled kernels are optional: if the C toolchain is missing the build
# emits a warning and the package falls back to the numpy implementations
# selected at import time in lpcoreset._kernels.
ext = Extension(
    "lpcoreset._kernels._core",
    ["src/lpcoreset/_kernels/_core.pyx"],
    include_dirs=[numpy.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    extra_compile_args=["-O3"],
    optional=True,
)

setup(ext_modules=cythonize([ext], language_level=3))
