"""Build script: compiles the optional simulation kernel.

The package is fully functional without the extension (a pure-Python twin
of the kernel is selected at import time); set PPSGAME_NO_EXT=1 to skip
the compile step entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("PPSGAME_NO_EXT", "") not in ("1", "true", "yes"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "ppsgame.sim._engine",
                    ["src/ppsgame/sim/_engine.pyx"],
                    # -ffp-contract=off keeps double arithmetic bit-identical
                    # to the pure-Python kernel (no FMA contraction).
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
