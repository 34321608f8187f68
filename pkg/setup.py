import os

from setuptools import setup

ext_modules = []
if os.environ.get("CHROMADEFECT_PURE") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/chromadefect/gradedlin/_core.pyx"],
            language_level=3,
        )
    except ImportError:
        # pure-python fallback keeps the package importable without a compiler
        ext_modules = []

setup(ext_modules=ext_modules)
