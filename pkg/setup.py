"""Build script: compiles the optional ray-cast kernel.

If Cython or a C compiler is unavailable the package installs anyway and
falls back to the pure-Python kernel at import time. Set DCASIM_NO_EXT=1
to skip the extension build explicitly.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Best-effort build_ext: a failed kernel compile is not fatal."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing entirely
            print(f"warning: skipping compiled kernel ({exc}); "
                  "pure-Python backend will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not compile {ext.name} ({exc}); "
                  "pure-Python backend will be used")


def extensions():
    if os.environ.get("DCASIM_NO_EXT"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "dcasim._kernels._raycast",
        ["src/dcasim/_kernels/_raycast.pyx"],
        include_dirs=[numpy.get_include()],
        # -ffp-contract=off keeps the compiled kernel bit-identical to the
        # pure-Python backend (no FMA contraction).
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
