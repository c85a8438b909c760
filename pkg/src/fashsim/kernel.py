"""Backend selection for the per-round decision kernel.

The compiled Cython kernel is preferred when its extension module built;
otherwise the NumPy implementation takes over. Both produce bit-identical
results, so the choice only affects speed.
"""

from typing import Callable, Tuple

from . import _pykernel

try:
    from . import _kernel as _compiled
except ImportError:  # extension not built; pure Python still works
    _compiled = None

BACKEND: str = "compiled" if _compiled is not None else "python"

decide_round: Callable = (
    _compiled.decide_round if _compiled is not None else _pykernel.decide_round
)


def available_backends() -> Tuple[str, ...]:
    """Names of the decision backends importable right now."""
    if _compiled is not None:
        return ("compiled", "python")
    return ("python",)


def get_decide(backend=None) -> Callable:
    """Resolve a backend name to its decide_round callable.

    None means the default (compiled when available).
    """
    if backend is None:
        return decide_round
    if backend == "python":
        return _pykernel.decide_round
    if backend == "compiled":
        if _compiled is None:
            raise ValueError("backend: compiled kernel is not available")
        return _compiled.decide_round
    raise ValueError("backend: expected 'compiled', 'python', or None (got %r)" % (backend,))
