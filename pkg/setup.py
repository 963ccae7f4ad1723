"""Build hook for the optional compiled scanner.

The extension is a pure accelerator: if Cython or a C compiler is missing
the build silently falls back to the pure-Python scanner, which is
behaviorally identical (see the parity tests).  Build in place with:

    python setup.py build_ext --inplace
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # no compiler: install pure
            print(f"schemascore: skipping compiled scanner ({exc})")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"schemascore: skipping compiled scanner ({exc})")


ext_modules = []
if not os.environ.get("SCHEMASCORE_PURE"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("schemascore._speedups", ["src/schemascore/_speedups.pyx"])],
            language_level=3,
        )
    except ImportError:
        print("schemascore: Cython not available, installing pure-Python scanner")

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
