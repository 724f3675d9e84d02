"""Hot loops, compiled when available.

The Cython extension ``_core`` is used when it was built; otherwise the
pure-Python reference in ``_purepy`` is used.  Set ``NONSTAT_AOS_BACKEND``
to ``python`` to force the fallback.  Both return identical results.

Kernel entry points (binary scenarios only):

``run_binary(code, params, n_op, n1, wsize, horizon, draws)``
    one trajectory -> ``(ops, gains, restarts)``; ``draws`` holds
    ``2 * horizon`` uniforms.
``run_binary_totals(code, params, n_op, n1, wsize, horizon, draws)``
    total gain of each row of a ``(runs, 2 * horizon)`` draw matrix.
``run_island(n_op, n1, wsize, horizon, psize, alpha, beta, credit_mean, draws)``
    one island-model population -> ``(totals, matrix)``; ``draws`` is
    ``(horizon, psize)``.
``circular_best(n1, wsize, sc, has_zero)``
    exhaustive circular-schedule optimum -> ``(numerator, schedule)``.
"""
from __future__ import annotations

import logging
import os

from . import _purepy

log = logging.getLogger(__name__)

DRAWS_PER_STEP = 2


def _load():
    if os.environ.get("NONSTAT_AOS_BACKEND", "").lower() == "python":
        return _purepy
    try:
        from . import _core
    except ImportError as exc:  # extension not built
        log.debug("compiled core unavailable (%s); using pure Python", exc)
        return _purepy
    return _core


_impl = _load()
BACKEND: str = _impl.BACKEND

run_binary = _impl.run_binary
run_binary_totals = _impl.run_binary_totals
run_island = _impl.run_island
circular_best = _impl.circular_best


def backends() -> dict:
    """Every importable backend module, keyed by name (for cross-checks and benchmarks)."""
    out = {"python": _purepy}
    try:
        from . import _core
        out["cython"] = _core
    except ImportError:
        pass
    return out
