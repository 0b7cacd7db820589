"""Backend selection for the hot kernels.

The accelerated kernels use numba's @njit. Setting the environment variable
GIBBSKIT_DISABLE_NUMBA=1 (read once, at import time) forces the pure-numpy
implementations; the same happens automatically when numba is not importable.
`gibbskit bench-kernels` times the two paths against each other.
"""

import os

_flag = os.environ.get("GIBBSKIT_DISABLE_NUMBA", "0")

try:
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via subprocess test
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and _flag not in ("1", "true", "yes")


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
