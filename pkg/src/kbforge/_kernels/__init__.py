"""Hot-loop kernels: compiled extension when built, pure Python otherwise.

Set ``KBFORGE_PURE_KERNELS=1`` to force the fallback (used by the
benchmark harness and the CI parity tests). Both implementations are
bit-compatible; selection only affects speed.
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("KBFORGE_PURE_KERNELS"):
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _fast as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

pair_priority = _impl.pair_priority
pair_priorities = _impl.pair_priorities
prefix_cut = _impl.prefix_cut

__all__ = ["BACKEND", "pair_priority", "pair_priorities", "prefix_cut"]
