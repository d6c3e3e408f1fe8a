"""Neutron double-slit bit-commitment simulator.

Thin Python surface over the C++ core: configuration, precomputed screen
patterns, decay and statistics helpers, and the batch experiment drivers.
"""

try:
    from ._qbcsim import *  # noqa: F401,F403  (installed package layout)
    from ._qbcsim import __doc__ as _core_doc
except ImportError:  # pragma: no cover - build-tree layout used by the tests
    from _qbcsim import *  # noqa: F401,F403
    from _qbcsim import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
