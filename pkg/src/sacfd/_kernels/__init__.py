"""Backend dispatch for the hot kernels.

Imports the compiled extension when available, otherwise the numpy fallback.
``SACFD_PURE_PYTHON=1`` forces the fallback regardless.
"""

import os

if os.environ.get("SACFD_PURE_PYTHON"):
    from . import fallback as _impl

    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import fallback as _impl

        BACKEND = "python"

mlp_forward = _impl.mlp_forward
mlp_backward = _impl.mlp_backward
tree_set = _impl.tree_set
tree_set_many = _impl.tree_set_many
tree_prefix_find = _impl.tree_prefix_find

__all__ = [
    "BACKEND",
    "mlp_forward",
    "mlp_backward",
    "tree_set",
    "tree_set_many",
    "tree_prefix_find",
]
