"""Build script for the optional compiled kernel core.

The package works without the extension: ``oracleid.kernels`` falls back to
the pure-Python implementation when ``oracleid._grover`` is missing or when
ORACLEID_PURE_PYTHON=1 is set.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible; fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            warnings.warn(f"skipping compiled kernels ({exc}); using pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"failed to build {ext.name} ({exc}); using pure-Python fallback")


try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("oracleid._grover", ["src/oracleid/_grover.pyx"])],
        language_level="3",
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
