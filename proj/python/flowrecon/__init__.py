"""Chain-workflow reconstruction from black-box I/O pairs.

The heavy lifting lives in the compiled `_core` extension; this package just
re-exports its public surface.
"""

from flowrecon._core import *  # noqa: F401,F403
from flowrecon._core import __version__  # noqa: F401
