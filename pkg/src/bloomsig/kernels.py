"""Decode kernel selection.

The compiled extension is preferred when built; the NumPy implementation is
the always-available fallback.  ``BLOOMSIG_KERNEL=pure`` or
``BLOOMSIG_KERNEL=compiled`` forces a specific one.
"""

from __future__ import annotations

import os

from . import _decode_py

_IMPLS = {"pure": _decode_py.decode_frame}

try:
    from . import _decode_cy  # type: ignore[attr-defined]

    _IMPLS["compiled"] = _decode_cy.decode_frame
except ImportError:  # extension not built; pure fallback
    _decode_cy = None


def available_kernels() -> tuple[str, ...]:
    return tuple(sorted(_IMPLS))


def get_kernel(name: str):
    try:
        return _IMPLS[name]
    except KeyError:
        raise ValueError(
            f"unknown kernel {name!r}; available: {available_kernels()}"
        ) from None


_forced = os.environ.get("BLOOMSIG_KERNEL", "").strip().lower()
if _forced and _forced not in _IMPLS:
    raise ImportError(
        f"BLOOMSIG_KERNEL={_forced!r} but available kernels are {available_kernels()}"
    )

ACTIVE_KERNEL = _forced or ("compiled" if "compiled" in _IMPLS else "pure")
decode_frame = _IMPLS[ACTIVE_KERNEL]
