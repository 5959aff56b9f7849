import os
import sys

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("QLSPSIM_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "qlspsim._kernels",
                    ["src/qlspsim/_kernels.pyx"],
                    # plain complex multiply: the kernels never see inf/nan operands
                    extra_compile_args=["-O3"] + ([] if sys.platform == "win32" else ["-fcx-limited-range"]),
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
