"""Build script: compiles the optional Cython kernel when the toolchain allows.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so any build failure here degrades gracefully to a
pure-Python install. Set ISAC_LAB_NO_EXT=1 to skip the extension on purpose.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("ISAC_LAB_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "isac_lab._ext._objective",
                    ["src/isac_lab/_ext/_objective.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except Exception as exc:  # noqa: BLE001 - any build-chain problem means "pure install"
        print(f"isac-lab: building without compiled kernels ({exc})")
        ext_modules = []

setup(ext_modules=ext_modules)
