"""Hot numeric kernels with a selectable backend.

The numba backend is used when numba imports cleanly, unless the environment
variable ``MCPMIX_DISABLE_NUMBA`` is set to a non-empty value other than
``0``; then the pure-numpy kernels are used. Both backends are exact to
floating-point reordering, and each is deterministic on its own.
"""

import os

from . import _numpy

BACKEND = "numpy"

if os.environ.get("MCPMIX_DISABLE_NUMBA", "") in ("", "0"):
    try:
        from . import _numba as _impl

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _impl = _numpy
else:
    _impl = _numpy

conv2d_forward = _impl.conv2d_forward
conv2d_backward_input = _impl.conv2d_backward_input
conv2d_backward_params = _impl.conv2d_backward_params
squared_edt = _impl.squared_edt
segnet_forward = _impl.segnet_forward
segnet_backward = _impl.segnet_backward
extractor_forward = _impl.extractor_forward
extractor_backward = _impl.extractor_backward

__all__ = [
    "BACKEND",
    "conv2d_forward",
    "conv2d_backward_input",
    "conv2d_backward_params",
    "squared_edt",
    "segnet_forward",
    "segnet_backward",
    "extractor_forward",
    "extractor_backward",
]
