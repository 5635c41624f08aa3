"""Kernel backend selection.

Prefers the compiled extension; falls back to the pure-Python twin when the
extension is missing (or when TEMPENS_PURE_PYTHON is set, which is how the
benchmark and the parity tests force the fallback).
"""

from __future__ import annotations

import os

if os.environ.get("TEMPENS_PURE_PYTHON"):
    from tempens import _kernels_py as kernels

    BACKEND = "python"
else:
    try:
        from tempens import _kernels as kernels  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from tempens import _kernels_py as kernels  # type: ignore[no-redef]

        BACKEND = "python"

comp_sum = kernels.comp_sum
comp_dot = kernels.comp_dot
logsumexp = kernels.logsumexp
alias_build = kernels.alias_build
alias_counts = kernels.alias_counts


def backend_name() -> str:
    """Which kernel implementation is active: 'compiled' or 'python'."""
    return BACKEND
