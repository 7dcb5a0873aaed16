"""Graph traversal kernels, compiled when available.

Set ``TIERGRAPH_PURE_PYTHON=1`` to force the pure-Python implementation.
``BACKEND`` names the implementation in use.
"""

import os

from . import _pykernels as python

compiled = None
if not os.environ.get("TIERGRAPH_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None

_impl = compiled if compiled is not None else python
BACKEND = "cython" if compiled is not None else "python"

reachable = _impl.reachable
dfs_orders = _impl.dfs_orders
mark_below = _impl.mark_below
mark_above = _impl.mark_above
canonical_sequence = _impl.canonical_sequence
collect = _impl.collect
redirect = _impl.redirect
release = _impl.release
