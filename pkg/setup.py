"""Build script: compiles the optional simulation kernel extension.

The compiled extension is a pure speedup; if Cython or a C compiler is
unavailable the build falls back to the pure-Python kernels and the
package works identically (see src/bracketlab/_kernels/__init__.py).
"""

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Let the install proceed when the extension cannot be compiled."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # no compiler, missing headers, ...
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        import warnings

        warnings.warn(
            f"bracketlab: compiled kernel unavailable ({exc}); "
            "falling back to pure-Python kernels"
        )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    # No -ffast-math: kernel results must be bit-identical to the
    # pure-Python reference (same IEEE-754 operation order).
    ext = Extension(
        "bracketlab._kernels._speedups",
        ["src/bracketlab/_kernels/_speedups.pyx"],
        extra_compile_args=["-O2"],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
