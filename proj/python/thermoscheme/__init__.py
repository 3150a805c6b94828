"""Thermodynamic formalism for interval maps with inducing schemes."""

try:
    from ._core import *  # noqa: F401,F403  installed layout, _core.so inside the package
    from ._core import __version__  # noqa: F401
except ImportError:
    # Build-tree layout: _core.so sits in the CMake binary dir on sys.path.
    from _core import *  # noqa: F401,F403
    from _core import __version__  # noqa: F401
