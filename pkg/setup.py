import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("VORTEXPAIRS_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        extensions = [
            Extension(
                "vortexpairs._ckernels",
                ["src/vortexpairs/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ]
        ext_modules = cythonize(
            extensions,
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
