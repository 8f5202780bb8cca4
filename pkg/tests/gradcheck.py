"""Central finite-difference gradient checking against the manual backward."""

from __future__ import annotations

import numpy as np


def max_rel_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-3) -> float:
    """Worst elementwise |a-n| / max(|a|, |n|, floor) over a block.

    The floor keeps near-zero entries from blowing up the ratio; genuinely
    wrong gradients produce errors orders of magnitude above any tolerance.
    """
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))


def finite_difference_grads(params, loss_fn, zeros_fn, eps: float = 1e-3):
    """Numeric gradient of ``loss_fn()`` w.r.t. every array in ``params``.

    Perturbs parameters in place (restoring each entry), so ``loss_fn``
    must close over the same ``params`` object.
    """
    numeric = zeros_fn(params)
    grads = dict(numeric.named_arrays())
    for name, arr in params.named_arrays():
        flat = arr.reshape(-1)
        out = grads[name].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            loss_plus = loss_fn()
            flat[i] = orig - eps
            loss_minus = loss_fn()
            flat[i] = orig
            out[i] = (loss_plus - loss_minus) / (2.0 * eps)
    return numeric


def compare_all_blocks(analytic, numeric, tol: float = 1e-4) -> dict[str, float]:
    """Per-block max relative error; raises AssertionError listing offenders."""
    errors = {}
    numeric_map = dict(numeric.named_arrays())
    for name, arr in analytic.named_arrays():
        errors[name] = max_rel_error(arr, numeric_map[name])
    offenders = {n: e for n, e in errors.items() if e >= tol}
    assert not offenders, f"gradient mismatch in blocks: {offenders}"
    return errors
