"""Build hook for the optional compiled kernels.

If Cython or a C compiler is unavailable the package installs without the
extension and falls back to the pure-Python kernels at import.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("efxmulti._ckernels", ["src/efxmulti/_ckernels.pyx"])],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )
except Exception:  # noqa: BLE001 - any failure means "build without it"
    ext_modules = []

setup(ext_modules=ext_modules)
