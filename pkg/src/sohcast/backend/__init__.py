"""Kernel backend selection.

The hot kernels (dynamics rollouts and the int8 inference primitives)
exist twice: a compiled Cython core (`_fastcore`) and a pure-numpy
fallback with identical contracts.

Default mode is ``auto``: the int8 primitives always use the compiled
core when built (uniformly faster, bit-identical to the fallback), and
the float rollout kernels dispatch on hidden size. Measured on the
benchmark (benchmarks/bench_backends.py): explicit loops beat the
batched-BLAS fallback only while the state is small (Euler d <= 16,
RK4 d <= 8, backward passes dominating); above that BLAS wins. Set
``SOHCAST_BACKEND=fallback`` or ``=compiled`` to force one side
everywhere.

Within one backend choice all results are deterministic; across
backends the float kernels may differ in the last ulp (accumulation
order), while the quantized kernels are bit-identical by construction.
"""

from __future__ import annotations

import os

from . import fallback

_choice = os.environ.get("SOHCAST_BACKEND", "auto")
if _choice not in ("auto", "fallback", "compiled"):
    raise RuntimeError(f"SOHCAST_BACKEND must be auto|fallback|compiled, got {_choice!r}")

_compiled = None
if _choice in ("auto", "compiled"):
    try:
        from . import _fastcore as _compiled  # type: ignore[attr-defined]
    except ImportError:
        if _choice == "compiled":
            raise
        _compiled = None

NAME = {"auto": "auto" if _compiled is not None else "fallback",
        "fallback": "fallback",
        "compiled": "compiled"}[_choice]

_EULER_COMPILED_MAX_DIM = 16
_RK4_COMPILED_MAX_DIM = 8


def _pick(d: int, threshold: int):
    if NAME == "fallback" or _compiled is None:
        return fallback
    if NAME == "compiled":
        return _compiled
    return _compiled if d <= threshold else fallback


def euler_fwd(h0, w_diag, U, V, rank, alpha, beta, dt, steps, u, need_saved):
    mod = _pick(h0.shape[-1], _EULER_COMPILED_MAX_DIM)
    return mod.euler_fwd(h0, w_diag, U, V, rank, alpha, beta, dt, steps, u, need_saved)


def euler_bwd(saved, w_diag, U, V, rank, alpha, beta, dt, steps, g_out):
    mod = _pick(g_out.shape[-1], _EULER_COMPILED_MAX_DIM)
    return mod.euler_bwd(saved, w_diag, U, V, rank, alpha, beta, dt, steps, g_out)


def rk4_fwd(h0, W, alpha, beta, dt, steps, u, need_saved):
    mod = _pick(h0.shape[-1], _RK4_COMPILED_MAX_DIM)
    return mod.rk4_fwd(h0, W, alpha, beta, dt, steps, u, need_saved)


def rk4_bwd(saved, W, alpha, beta, dt, steps, g_out):
    mod = _pick(g_out.shape[-1], _RK4_COMPILED_MAX_DIM)
    return mod.rk4_bwd(saved, W, alpha, beta, dt, steps, g_out)


def _quant_mod():
    return _compiled if (_compiled is not None and NAME != "fallback") else fallback


def qlinear(xq, zp_in, s_in, wq, s_w, bias, s_out, zp_out):
    return _quant_mod().qlinear(xq, zp_in, s_in, wq, s_w, bias, s_out, zp_out)


def ln_f64(x, gain, bias, eps):
    return _quant_mod().ln_f64(x, gain, bias, eps)


def ptanh(x):
    return _quant_mod().ptanh(x)


def qeuler(h, w_diag, U, V, rank, alpha, beta, dt, steps, u_mean):
    return _quant_mod().qeuler(h, w_diag, U, V, rank, alpha, beta, dt, steps, u_mean)


# Helpers shared by both paths (always the numpy definitions).
pexp = fallback.pexp
round_away = fallback.round_away
quant_f64 = fallback.quant_f64
dequant_f64 = fallback.dequant_f64
seq_sum = fallback.seq_sum
lowrank_apply = fallback.lowrank_apply


def backends() -> dict[str, object]:
    """Mapping of available backend name -> module (for tests/benchmarks)."""
    out = {"fallback": fallback}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out
