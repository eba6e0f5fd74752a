from setuptools import Extension, setup

# The compiled kernel is optional: lexsched.kernels falls back to the pure
# Python implementation when the extension is missing.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("lexsched._ckernels", ["src/lexsched/_ckernels.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
