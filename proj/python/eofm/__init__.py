"""Elastographic optical flow: phantoms, speckle tracking and displacement estimation.

Images are ``(height, width)`` float arrays, displacement fields ``(2, height, width)``
with the lateral component first, bubbles ``(n, 6)`` rows of
``cx, cy, ux, uy, weight, score``.
"""

try:
    from ._eofm import *  # noqa: F401,F403
    from ._eofm import __version__
except ImportError:  # in-tree build: the extension sits next to the package, not inside it
    from _eofm import *  # noqa: F401,F403
    from _eofm import __version__
