"""Pure-python oracle-pass kernel.

Reference implementation of the hot inner loop shared with the compiled
extension: one full simulated query pass over the machine register. Every
operation here is a permutation of coordinates, so the two backends produce
bitwise-identical vectors.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _x_sweep(view: np.ndarray, xb: np.ndarray, m: int) -> None:
    cache_dim = view.shape[0]
    base = np.arange(cache_dim)
    for idx in range(xb.shape[0]):
        if xb[idx]:
            i0, r = divmod(idx, m)
            mask = 1 << (m - 1 - r)
            view[:, i0] = view[base ^ mask, i0]


def segment_pass(psi, xb, yv, m, d_w, gflip) -> None:
    """Apply one oracle-simulation pass to the machine vector, in place.

    psi: complex128 vector laid out as (cache, index, answer, work).
    xb:  uint8 x bits (length n); a set bit XORs its block's cache bit.
    yv:  int64 y block values (length p); block i0 swaps the answer bit on
         index branch i0 for every cache value c with gflip[c, yv[i0]] = 1.
    gflip: uint8 gadget table, gflip[c][v] = g(c, v).

    The sequence is x-pass, y-pass, x-pass in tape order, matching the
    machine's per-step transitions exactly; the second x-pass returns the
    cache register to 0 on every branch.
    """
    cache_dim = gflip.shape[0]
    p_pad = psi.shape[0] // (cache_dim * 2 * d_w)
    view = psi.reshape(cache_dim, p_pad, 2, d_w)
    _x_sweep(view, xb, m)
    for i0 in range(yv.shape[0]):
        sel = gflip[:, yv[i0]].astype(bool)
        if sel.any():
            tmp = view[sel, i0, 0].copy()
            view[sel, i0, 0] = view[sel, i0, 1]
            view[sel, i0, 1] = tmp
    _x_sweep(view, xb, m)
