"""Build script for the optional compiled stencil kernel.

The package is fully functional without the extension: sel._kernels falls
back to a vectorized NumPy implementation when the compiled module is
missing.  `python -m pip install -e . --no-build-isolation` builds it.
"""

import sys

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "sel._kernels._core",
                ["src/sel/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - degraded build environments only
    print(f"sel: skipping compiled kernel ({exc}); NumPy fallback will be used",
          file=sys.stderr)
    ext_modules = []

setup(ext_modules=ext_modules)
