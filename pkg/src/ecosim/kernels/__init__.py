"""Day-loop kernels.

The engine runs its inner day loop through one of two interchangeable
kernels: a compiled Cython extension (built at install time) and a pure
Python fallback. Both consume the same random substreams in the same
order and perform the same double-precision operation sequence, so a run
is bit-identical whichever kernel executed it.

Selection happens at import: the compiled kernel when available, else the
fallback. Set ``ECOSIM_KERNEL=python`` or ``ECOSIM_KERNEL=cython`` to
force a choice.
"""

from __future__ import annotations

import os

from . import pyday

try:
    from . import _cyday
except ImportError:
    _cyday = None

_KERNELS = {"python": pyday}
if _cyday is not None:
    _KERNELS["cython"] = _cyday


def get_kernel(name: str | None = None):
    """Resolve a kernel module by name; None picks the active default."""
    if name is None:
        return _active
    try:
        return _KERNELS[name]
    except KeyError:
        raise ValueError(f"unknown kernel {name!r}; available: {sorted(_KERNELS)}") from None


def available_kernels() -> list[str]:
    return sorted(_KERNELS)


_forced = os.environ.get("ECOSIM_KERNEL", "").strip().lower()
if _forced:
    if _forced not in _KERNELS:
        raise ImportError(f"ECOSIM_KERNEL={_forced!r} but available kernels are {sorted(_KERNELS)}")
    _active = _KERNELS[_forced]
else:
    _active = _KERNELS.get("cython", pyday)


def active_kernel_name() -> str:
    return _active.KERNEL_NAME
