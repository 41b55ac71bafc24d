"""Build script for the optional compiled kernel extension.

The package works without the extension (a numpy fallback is selected at
import time); the build therefore marks it optional so a missing compiler
degrades gracefully instead of failing the install.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    extension = Extension(
        "socialscene.kernels._core",
        ["src/socialscene/kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    extension.optional = True
    ext_modules = cythonize(
        [extension],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
