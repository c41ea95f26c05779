import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # fall back to the pure-Python kernel
    cythonize = None

extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "kolmo.sde._lvkernel",
                ["src/kolmo/sde/_lvkernel.pyx"],
                include_dirs=[np.get_include()],
                # no contraction: keeps results bitwise equal to the Python kernel
                extra_compile_args=["-O3", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions)
