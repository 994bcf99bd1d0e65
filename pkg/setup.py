"""Build script for the optional compiled kernel extension.

The package works without the extension: segsweep._kernels falls back to the
numpy backend when the compiled module is absent.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "segsweep._kernels._core",
                sources=["src/segsweep/_kernels/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
