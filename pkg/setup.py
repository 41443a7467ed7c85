import os

from setuptools import setup

ext_modules = []
if os.environ.get("WMH2_NO_EXT", "") in ("", "0"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("wmh2._kernels", ["src/wmh2/_kernels.pyx"], include_dirs=[np.get_include()],
                       extra_compile_args=["-O3"])],
            language_level=3,
        )
    except ImportError:
        # no Cython: the numpy fallback is used
        ext_modules = []

setup(ext_modules=ext_modules)
