"""Build hook for the optional compiled kernel extension.

The package works without the extension (numpy fallback); the extension is
marked optional so a missing C toolchain degrades to the pure install.
"""
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "proxpoint._kernels._core",
        ["src/proxpoint/_kernels/_core.pyx"],
        extra_compile_args=["-O3"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
    if cythonize is not None
    else [],
)
