"""Labeled fractal pre-training images from affine IFS codes.

Thin re-export of the native extension. The wheel places ``_fractalgen``
inside this package; a CMake tree builds it as a top-level module instead,
so fall back to that for in-tree test runs.
"""

try:
    from ._fractalgen import *  # noqa: F401,F403
    from ._fractalgen import __version__  # noqa: F401
except ImportError:
    from _fractalgen import *  # noqa: F401,F403
    from _fractalgen import __version__  # noqa: F401
