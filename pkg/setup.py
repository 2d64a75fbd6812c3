"""Build the optional Cython kernels; the package works without them."""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [Extension("tamechar._ckernels", ["src/tamechar/_ckernels.pyx"], extra_compile_args=["-O3"], optional=True)],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
