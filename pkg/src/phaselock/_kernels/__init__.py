"""Kernel backend selection.

Imports the compiled extension when available, otherwise falls back to the
pure-NumPy implementation. Set ``PHASELOCK_PURE=1`` to force the fallback
(useful for benchmarking and debugging).
"""

import os

if os.environ.get("PHASELOCK_PURE", "").strip() not in ("", "0"):
    from . import pure as _impl

    BACKEND = "pure"
else:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import pure as _impl

        BACKEND = "pure"

integrate_phase = _impl.integrate_phase
run_pulse = _impl.run_pulse

__all__ = ["BACKEND", "integrate_phase", "run_pulse"]
