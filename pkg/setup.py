from setuptools import setup

try:
    from Cython.Build import cythonize
    import numpy
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("lamtree._kernels", ["src/lamtree/_kernels.pyx"], include_dirs=[numpy.get_include()])],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
