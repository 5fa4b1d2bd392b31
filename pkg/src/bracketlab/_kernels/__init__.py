"""Kernel backend selection.

Imports the compiled extension when available, otherwise the pure
Python fallback. Both produce bit-identical results; the environment
variable BRACKETLAB_PURE_KERNELS=1 forces the fallback (used by tests
and the benchmark).
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("BRACKETLAB_PURE_KERNELS", "") in ("", "0"):
    try:
        from . import _speedups as _impl
    except ImportError:
        _impl = _pure
else:
    _impl = _pure

BACKEND = _impl.BACKEND
pair_probability = _impl.pair_probability
run_iterations = _impl.run_iterations
splitmix64_stream = _impl.splitmix64_stream


def available_backends() -> dict:
    """Importable backends by name (for tests and the benchmark)."""
    backends = {"pure": _pure}
    try:
        from . import _speedups

        backends["compiled"] = _speedups
    except ImportError:
        pass
    return backends
