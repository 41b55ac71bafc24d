"""Numeric kernels with a compiled fast path.

The Cython extension is optional: if it failed to build (or was stripped from
the wheel) the numpy fallback is used instead. Selection happens once, here,
at import time; ``BACKEND`` records which one won.
"""

from . import fallback as _fallback

try:
    from . import _core as _impl

    BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on build environment
    _impl = _fallback
    BACKEND = "python"

social_field = _impl.social_field
gaussian_field = _impl.gaussian_field
rollout_costs = _impl.rollout_costs

__all__ = ["BACKEND", "social_field", "gaussian_field", "rollout_costs", "fallback"]
fallback = _fallback
