"""Rate-evaluation backend selection.

The amplitude optimizer calls the scalar rate function thousands of times
per sweep, so a compiled Cython kernel implements the whole pipeline in C
doubles.  When the extension is unavailable the plain-Python reference
pipeline is used instead; `BACKEND` records which one was picked at import
time.  benchmarks/bench_fastpath.py compares the two.
"""
from __future__ import annotations

import numpy as np

try:
    from . import _fastpath as _ext
except ImportError:  # pure-Python install; fall back to the reference path
    _ext = None

BACKEND = "compiled" if _ext is not None else "python"


def rate_scalar_python(alpha: float, gamma: float, eps9: np.ndarray, eta: float,
                       p_d: float, f_e: float, p_key: float, split: bool) -> float:
    """Reference-pipeline rate evaluation (the fallback backend)."""
    from .channel import ChannelModel
    from .keyrate import key_rate
    from .states import DegenerateEmbeddingError
    from .virtual_bloch import SingularBlochError
    from .bounds import ZeroGainError

    try:
        point = key_rate(alpha, gamma, np.asarray(eps9).reshape(3, 3),
                         ChannelModel(eta=eta, p_d=p_d), f_e=f_e, p_key=p_key,
                         povm="split" if split else "union")
    except (DegenerateEmbeddingError, SingularBlochError, ZeroGainError):
        return 0.0
    return point.R


if _ext is not None:
    rate_scalar_compiled = _ext.rate_scalar
else:
    rate_scalar_compiled = None


def rate_scalar(alpha: float, gamma: float, eps9: np.ndarray, eta: float,
                p_d: float, f_e: float, p_key: float, split: bool) -> float:
    """Rate at one operating point via the backend selected at import."""
    if _ext is not None:
        return _ext.rate_scalar(float(alpha), float(gamma),
                                np.ascontiguousarray(eps9, dtype=float),
                                float(eta), float(p_d), float(f_e),
                                float(p_key), bool(split))
    return rate_scalar_python(alpha, gamma, eps9, eta, p_d, f_e, p_key, split)
