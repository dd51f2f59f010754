"""Build script: compiles the optional Cython kernel extension.

The package is fully functional without the extension (a pure-NumPy fallback
is selected at import time), so a failed compile downgrades to a warning
instead of aborting the install.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible; warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            "WARNING: building the compiled kernels failed (%s); "
            "falling back to the pure-NumPy implementation." % (exc,),
            file=sys.stderr,
        )


def make_extensions():
    import numpy as np
    from Cython.Build import cythonize

    ext = Extension(
        "phaselock._kernels._core",
        ["src/phaselock/_kernels/_core.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize(
        [ext],
        language_level=3,
        compiler_directives={"boundscheck": False, "wraparound": False},
    )


try:
    extensions = make_extensions()
except Exception as exc:  # Cython unavailable
    print("WARNING: Cython unavailable (%s); installing pure-Python only." % (exc,), file=sys.stderr)
    extensions = []

setup(ext_modules=extensions, cmdclass={"build_ext": OptionalBuildExt})
