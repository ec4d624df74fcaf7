"""Trace formulas and spectral oracles for twisted-periodic linear Hamiltonian systems.

The heavy lifting lives in the compiled module ``_hamtrace``; this package
re-exports its surface. When running against a plain CMake build (no wheel),
set HAMTRACE_MODULE_DIR to the directory holding the compiled module.
"""

import os
import sys

_mod_dir = os.environ.get("HAMTRACE_MODULE_DIR")
if _mod_dir and _mod_dir not in sys.path:
    sys.path.insert(0, _mod_dir)

try:
    from _hamtrace import *  # noqa: F401,F403
    from _hamtrace import threebody  # noqa: F401
except ImportError:  # wheel layout: module is inside the package
    from ._hamtrace import *  # noqa: F401,F403
    from ._hamtrace import threebody  # noqa: F401

__version__ = "1.0.0"
