from setuptools import Extension, setup

from Cython.Build import cythonize
import numpy as np

extensions = [
    Extension(
        "aepm._core",
        sources=["src/aepm/_core.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(extensions, language_level="3"))
