"""Shooting-method toolkit for rotationally symmetric lambda-hypersurfaces.

Thin python layer over the C++ core: profile-curve integration with event
detection, first-crossing type classification, bisection to the critical
shooting parameters (cylinder and torus constructions), curvature/residual
verification, and surface-of-revolution mesh export.
"""

try:
    from ._lambdasurf import *  # noqa: F401,F403  (installed package layout)
    from ._lambdasurf import __version__  # noqa: F401
except ImportError:  # build-tree layout: extension on PYTHONPATH
    from _lambdasurf import *  # noqa: F401,F403
    from _lambdasurf import __version__  # noqa: F401
