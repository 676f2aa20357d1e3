"""Build script: compiles the optional polynomial kernel.

The extension is a convenience, not a requirement.  Any failure during
cythonization or compilation downgrades the install to the pure Python
kernel with a warning instead of breaking it.
"""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:
            print("warning: kernel extension not built (%s); "
                  "using the pure Python kernel" % exc, file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print("warning: %s not built (%s)" % (ext.name, exc),
                  file=sys.stderr)


ext_modules = []
try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        ["src/coframes/_kernel.pyx"], language_level=3)
except Exception as exc:
    print("warning: cythonize unavailable (%s); pure Python kernel only"
          % exc, file=sys.stderr)

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
