"""Magnitude pruning with exact global sparsity and persistent masks.

Prunable tensors are every Linear weight plus the dynamics w_diag, U
and V; biases, LayerNorm parameters and alpha/beta are untouched.
Ranking is global across tensors by |w|, ties broken by (tensor order,
flat index), so the zero-set at sparsity s is always contained in the
zero-set at any s' > s.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .models import StudentModel


@dataclass
class PruneMask:
    """Binary keep-masks per prunable tensor (1 = keep, 0 = pruned)."""

    sparsity: float
    masks: dict  # param name -> uint8 ndarray with the param's shape

    def zero_count(self) -> int:
        return int(sum(int((m == 0).sum()) for m in self.masks.values()))

    def total(self) -> int:
        return int(sum(m.size for m in self.masks.values()))


def _global_order(params):
    """Indices of all prunable scalars sorted by (|w|, tensor order, index)."""
    mags = np.concatenate([np.abs(p.data, dtype=np.float64).ravel() for p in params])
    return np.argsort(mags, kind="stable")  # stable: ties keep concatenation order


def magnitude_prune(model: StudentModel, sparsity: float):
    """Zero the globally smallest floor(s*N) prunable weights of a copy.

    Returns (pruned_model, PruneMask). The forecasting interface and all
    non-prunable tensors are untouched.
    """
    if not 0.0 <= sparsity < 1.0:
        raise ConfigError(f"sparsity must be in [0, 1), got {sparsity}")
    pruned = model.copy()
    params = pruned.prunable_params()
    total = sum(p.data.size for p in params)
    n_zero = int(np.floor(sparsity * total))
    kill = _global_order(params)[:n_zero]
    flat_mask = np.ones(total, np.uint8)
    flat_mask[kill] = 0
    masks = {}
    off = 0
    for p in params:
        m = flat_mask[off:off + p.data.size].reshape(p.data.shape)
        off += p.data.size
        p.data *= m
        masks[p.name] = m
    return pruned, PruneMask(sparsity=sparsity, masks=masks)


def masked_grad_apply(model: StudentModel, mask: PruneMask) -> None:
    """Zero gradients at pruned positions so optimizer steps never
    resurrect a pruned weight (moments stay zero there as well)."""
    by_name = {p.name: p for p in model.prunable_params()}
    for name, m in mask.masks.items():
        p = by_name[name]
        if p.grad is not None:
            p.grad *= m


def apply_mask(model: StudentModel, mask: PruneMask) -> None:
    """Re-zero masked weights (defensive; exact under masked gradients)."""
    by_name = {p.name: p for p in model.prunable_params()}
    for name, m in mask.masks.items():
        by_name[name].data *= m


def pruned_zero_count(model: StudentModel) -> int:
    return int(sum(int((p.data == 0).sum()) for p in model.prunable_params()))


def prune_variants(model: StudentModel, sparsities) -> list[tuple[float, StudentModel, PruneMask]]:
    """One independently pruned copy per sparsity level."""
    out = []
    for s in sparsities:
        pruned, mask = magnitude_prune(model, float(s))
        out.append((float(s), pruned, mask))
    return out
