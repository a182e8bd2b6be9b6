"""Build hook for the optional compiled Fourier-Motzkin kernel.

Without Cython or a C compiler the package still installs and runs on the
pure-Python kernel.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    cythonize = None

if cythonize is not None:
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("timed_opacity._fm", ["src/timed_opacity/_fm.pyx"], optional=True)],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )

setup(ext_modules=ext_modules)
