import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "cavmag._dopri_ext",
        ["src/cavmag/_dopri_ext.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        optional=True,
    )
]

setup(ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}))
