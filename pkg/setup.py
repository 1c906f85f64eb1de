"""Build script for the optional compiled kernels.

The package works without the extension: kernels/__init__.py falls back to
the pure-Python implementation when the compiled module is missing.
"""

import os

from setuptools import Extension, setup

HERE = os.path.dirname(os.path.abspath(__file__))
PYX = os.path.join(HERE, "src", "sealprint", "kernels", "_native.pyx")

ext_modules = []
if os.path.exists(PYX):
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "sealprint.kernels._native",
                    sources=[os.path.relpath(PYX, HERE)],
                    # -ffp-contract=off: keep float results bit-identical to
                    # the pure-Python fallback (no fused multiply-add).
                    extra_compile_args=["-ffp-contract=off"],
                    optional=True,
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )

setup(ext_modules=ext_modules)
