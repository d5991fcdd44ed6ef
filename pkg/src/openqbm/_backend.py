"""Import-time selection between the compiled core and the numpy fallback.

Set ``OPENQBM_BACKEND=python`` to force the fallback (used by the test suite
to check that both backends agree).
"""
import logging
import os

from . import _fallback

log = logging.getLogger(__name__)

NAME = "python"
_impl = _fallback

if os.environ.get("OPENQBM_BACKEND", "").lower() != "python":
    try:
        from . import _core as _impl  # noqa: F811
        NAME = "cython"
    except ImportError:  # extension not built
        log.debug("compiled core unavailable, using numpy fallback")
        _impl = _fallback

cl_rhs = _impl.cl_rhs
transport_rhs = _impl.transport_rhs
oracle_sum = _impl.oracle_sum
