"""Backend selection for the prime-field row-reduction kernel.

The compiled extension is used when it was built; otherwise the pure
Python implementation with the same signature is used.
"""

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

HAVE_FIELD_KERNEL = True
COMPILED_AVAILABLE = _compiled is not None
BACKEND = "cython" if COMPILED_AVAILABLE else "python"
_impl = _compiled.rref_mod_p if COMPILED_AVAILABLE else _kernels_py.rref_mod_p


def use_backend(name: str) -> None:
    """Switch between ``"cython"`` and ``"python"`` at runtime."""
    global BACKEND, _impl
    if name == "cython":
        if not COMPILED_AVAILABLE:
            raise RuntimeError("compiled kernel is not built")
        _impl = _compiled.rref_mod_p
    elif name == "python":
        _impl = _kernels_py.rref_mod_p
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name


def rref_mod_p(rows, ncols, p, track):
    """Return (reduced rows, transform rows or None, pivot columns)."""
    return _impl(rows, ncols, p, track)
