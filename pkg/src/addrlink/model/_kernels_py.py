"""Pure-numpy implementation of the node-attention kernels.

Reference backend; the compiled module in ``_kernels.pyx`` implements the
same two entry points. Shapes: h is (B, N, F), neighbor masks are
(B, N, N) with row u marking the meta-path neighborhood of node u (self
included), node_mask is (B, N) with 1 for real nodes, and the attention
tensor is (K, 2F). Rows whose neighborhood is empty (padding) yield zero
output rows.
"""

from __future__ import annotations

import numpy as np


def _leaky(x: np.ndarray, slope: float) -> np.ndarray:
    return np.where(x >= 0, x, slope * x)


def node_attention_forward(h, nbr, node_mask, attn, slope):
    """Masked multi-head neighbor attention.

    Returns (z, alpha, s_left, s_right): the per-node concatenated head
    outputs (B, N, K*F), attention coefficients (B, K, N, N), and the two
    halves of the pre-activation edge scores (B, N, K) kept for backward.
    """
    B, N, F = h.shape
    K = attn.shape[0]
    s_left = h @ attn[:, :F].T          # (B, N, K)
    s_right = h @ attn[:, F:].T
    e = _leaky(s_left[:, :, None, :] + s_right[:, None, :, :], slope)  # (B,u,v,K)
    mask = nbr.astype(bool)[..., None]
    e = np.where(mask, e, -np.inf)
    e_max = e.max(axis=2, keepdims=True)
    e_max = np.where(np.isfinite(e_max), e_max, 0.0)
    ex = np.where(mask, np.exp(e - e_max), 0.0)
    denom = ex.sum(axis=2, keepdims=True)
    alpha = np.divide(ex, denom, out=np.zeros_like(ex), where=denom > 0)
    alpha = np.ascontiguousarray(alpha.transpose(0, 3, 1, 2))          # (B,K,N,N)
    agg = alpha @ h[:, None, :, :]                                     # (B,K,N,F)
    z = _leaky(agg, slope)
    z = np.ascontiguousarray(z.transpose(0, 2, 1, 3)).reshape(B, N, K * F)
    return z, alpha, s_left, s_right


def node_attention_backward(dz, h, nbr, node_mask, attn, slope, alpha, s_left, s_right):
    """Gradients of the masked attention: returns (dh, dattn)."""
    B, N, F = h.shape
    K = attn.shape[0]
    dz4 = dz.reshape(B, N, K, F).transpose(0, 2, 1, 3)                 # (B,K,N,F)

    agg = alpha @ h[:, None, :, :]
    dagg = dz4 * np.where(agg >= 0, 1.0, slope)

    dalpha = dagg @ np.swapaxes(h, 1, 2)[:, None, :, :]                # (B,K,N,N)
    dh = np.einsum("bkuv,bkuf->bvf", alpha, dagg)

    # Softmax backward over the neighbor axis; alpha is zero off-mask so
    # off-mask entries contribute nothing.
    dot = (dalpha * alpha).sum(axis=3, keepdims=True)
    de = alpha * (dalpha - dot)
    e_pre = s_left[:, :, None, :] + s_right[:, None, :, :]             # (B,u,v,K)
    de_pre = de * np.where(e_pre >= 0, 1.0, slope).transpose(0, 3, 1, 2)

    ds_left = de_pre.sum(axis=3)                                       # (B,K,N) over v
    ds_right = de_pre.sum(axis=2)                                      # (B,K,N) over u
    da_left = np.einsum("bku,buf->kf", ds_left, h)
    da_right = np.einsum("bkv,bvf->kf", ds_right, h)
    dattn = np.concatenate([da_left, da_right], axis=1)

    dh += np.einsum("bku,kf->buf", ds_left, attn[:, :F])
    dh += np.einsum("bkv,kf->bvf", ds_right, attn[:, F:])
    return dh, dattn
