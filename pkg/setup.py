"""Build script for the optional compiled decoder kernels.

The package works without the extension (a numpy fallback is selected at
import time), so any failure to cythonize or compile is non-fatal.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/scldpc/kernels/_bp_cy.pyx",
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
    for ext in ext_modules:
        ext.include_dirs.append(np.get_include())
        ext.extra_compile_args = ["-O3"]
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"skipping compiled kernels ({exc}); pure-numpy backend will be used")

setup(ext_modules=ext_modules)
