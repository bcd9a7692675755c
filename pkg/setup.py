"""Build script for the optional compiled simulation kernel.

The package is pure Python.  When Cython and a C compiler are available,
the hot event-loop module (src/scalerbench/engine/_kernel.py) is compiled
in place; the resulting extension shadows the interpreted module at import
time.  If compilation is impossible the install still succeeds and the
interpreted kernel is used.  Set SCALERBENCH_PURE=1 to skip compilation.
"""

import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """build_ext that downgrades compiler failures to a warning."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - depends on toolchain
            print(f"warning: compiled kernel skipped ({exc}); "
                  "falling back to the interpreted kernel")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover
            print(f"warning: could not compile {ext.name} ({exc}); "
                  "falling back to the interpreted kernel")


ext_modules = []
if os.environ.get("SCALERBENCH_PURE") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/scalerbench/engine/_kernel.py"],
            language_level=3,
        )
    except ImportError:  # pragma: no cover
        print("warning: Cython not available; installing interpreted kernel only")

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
