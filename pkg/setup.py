"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension; `mimocap._kernels`
falls back to the NumPy implementation when the compiled module is missing.
Set MIMOCAP_NO_EXT=1 to skip the build entirely.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Try to build the Cython kernels; degrade to pure Python on failure."""

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
            "warning: compiled mimocap kernels were not built (%s); "
            "the pure-Python fallback will be used" % exc
        )


def extension_modules():
    if os.environ.get("MIMOCAP_NO_EXT"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "mimocap._kernels._cykernels",
        ["src/mimocap/_kernels/_cykernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    directives = {
        "language_level": "3",
        "boundscheck": False,
        "wraparound": False,
        "cdivision": True,
    }
    return cythonize([ext], compiler_directives=directives)


setup(cmdclass={"build_ext": OptionalBuildExt}, ext_modules=extension_modules())
