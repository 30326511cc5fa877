import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "nnelast._core",
        ["src/nnelast/_core.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

# The compiled core is optional: nnelast.kernels falls back to the pure
# NumPy implementation when nnelast._core is missing.
if cythonize is not None:
    ext_modules = cythonize(extensions, compiler_directives={"language_level": "3"})
else:
    ext_modules = []

setup(ext_modules=ext_modules)
