import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "nonstat_aos._core",
        ["src/nonstat_aos/_core.pyx"],
        include_dirs=[np.get_include()],
        # no FMA contraction: results must match the pure-Python kernels bit for bit
        extra_compile_args=["-O3", "-ffp-contract=off"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
