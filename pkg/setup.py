import os

from setuptools import setup

# The compiled kernel extension is optional: the package falls back to the
# NumPy implementation in corrineq._kernels.pure when the extension is
# missing. Set CORRINEQ_NO_EXT=1 to skip the build entirely.
ext_modules = []
if not os.environ.get("CORRINEQ_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools.extension import Extension

        ext = Extension(
            "corrineq._kernels._compiled",
            ["src/corrineq/_kernels/_compiled.pyx"],
            include_dirs=[numpy.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize([ext], language_level=3)
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
