"""Build hook: compiles the optional gradient-boosting kernels.

The package works without the extension (a pure-Python backend is selected
at import time), so any failure here only costs speed.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/satguide/gbdt/_kernels_c.pyx"],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"satguide: skipping compiled kernels ({exc})")

setup(ext_modules=ext_modules)
