"""Builds the optional Cython kernels; the package falls back to numpy when absent."""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("flexcert._kernels", ["src/flexcert/_kernels.pyx"],
                   extra_compile_args=["-O3"])],
        compiler_directives=dict(
            language_level="3",
            boundscheck=False,
            wraparound=False,
            cdivision=True,
            initializedcheck=False,
        ),
    )

setup(ext_modules=ext_modules)
