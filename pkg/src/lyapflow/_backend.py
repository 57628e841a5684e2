"""Kernel dispatch: compiled extension when importable, numpy fallback otherwise.

Set ``LYAPFLOW_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os

from lyapflow import _pycore

if os.environ.get("LYAPFLOW_BACKEND", "").lower() == "python":
    _impl = _pycore
else:
    try:
        from lyapflow import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pycore

NAME = "python" if _impl is _pycore else "compiled"
balance = _impl.balance
orthes = _impl.orthes
hqr = _impl.hqr
run_trials = _impl.run_trials


def get(name: str):
    """Kernel module by name ("compiled" or "python"); for benchmarks and tests."""
    if name == "python":
        return _pycore
    if name == "compiled":
        from lyapflow import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")
