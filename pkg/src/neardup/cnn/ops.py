"""Layer primitives: im2col convolution, batch norm, pooling, activations.

Forward functions return (output, cache); backward functions consume the
cache and the upstream gradient. Everything operates on (batch, channels,
height, width) arrays and is dtype-agnostic (float32 for training, float64
for gradient checking).
"""

from __future__ import annotations

import numpy as np


def im2col(x: np.ndarray, k: int, stride: int, pad: int):
    """Unfold conv windows: (B, C, H, W) -> (B, out_h*out_w, C*k*k)."""
    B, C, H, W = x.shape
    out_h = (H + 2 * pad - k) // stride + 1
    out_w = (W + 2 * pad - k) // stride + 1
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    s0, s1, s2, s3 = xp.strides
    windows = np.lib.stride_tricks.as_strided(
        xp, (B, C, out_h, out_w, k, k),
        (s0, s1, s2 * stride, s3 * stride, s2, s3), writeable=False)
    cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(B, out_h * out_w, C * k * k)
    return np.ascontiguousarray(cols), out_h, out_w


def col2im(dcols: np.ndarray, x_shape, k: int, stride: int, pad: int,
           out_h: int, out_w: int) -> np.ndarray:
    """Fold window gradients back onto the (padded) input, overlap-adding."""
    B, C, H, W = x_shape
    dxp = np.zeros((B, C, H + 2 * pad, W + 2 * pad), dtype=dcols.dtype)
    d6 = dcols.reshape(B, out_h, out_w, C, k, k).transpose(0, 3, 1, 2, 4, 5)
    for i in range(k):
        for j in range(k):
            dxp[:, :, i:i + stride * out_h:stride, j:j + stride * out_w:stride] += d6[..., i, j]
    return dxp[:, :, pad:pad + H, pad:pad + W]


def conv_forward(x, w, b, stride: int, pad: int = 1):
    F = w.shape[0]
    cols, out_h, out_w = im2col(x, w.shape[2], stride, pad)
    wmat = w.reshape(F, -1)
    out = cols @ wmat.T + b
    out = out.transpose(0, 2, 1).reshape(x.shape[0], F, out_h, out_w)
    cache = (cols, x.shape, w, stride, pad, out_h, out_w)
    return out, cache


def conv_backward(dout, cache):
    cols, x_shape, w, stride, pad, out_h, out_w = cache
    F = w.shape[0]
    dmat = dout.reshape(x_shape[0], F, out_h * out_w).transpose(0, 2, 1)
    dw = np.einsum("bpf,bpc->fc", dmat, cols).reshape(w.shape)
    db = dout.sum(axis=(0, 2, 3))
    dcols = dmat @ w.reshape(F, -1)
    dx = col2im(dcols, x_shape, w.shape[2], stride, pad, out_h, out_w)
    return dx, dw, db


def batchnorm_forward(x, gamma, beta, running_mean, running_var,
                      eps: float, momentum: float, training: bool):
    """Channel-wise batch normalization over (B, H, W).

    In training mode batch statistics are used and the running estimates
    are updated in place; in inference mode the running estimates are used.
    Cache includes the normalized activations for test probes.
    """
    if training:
        mu = x.mean(axis=(0, 2, 3))
        var = x.var(axis=(0, 2, 3))  # biased, matches normalization
        running_mean *= (1.0 - momentum)
        running_mean += momentum * mu
        running_var *= (1.0 - momentum)
        running_var += momentum * var
    else:
        mu = running_mean
        var = running_var
    ivar = 1.0 / np.sqrt(var + eps)
    xhat = (x - mu[None, :, None, None]) * ivar[None, :, None, None]
    out = gamma[None, :, None, None] * xhat + beta[None, :, None, None]
    return out, (xhat, ivar, gamma)


def batchnorm_backward(dout, cache):
    xhat, ivar, gamma = cache
    B, C, H, W = dout.shape
    n = B * H * W
    dgamma = (dout * xhat).sum(axis=(0, 2, 3))
    dbeta = dout.sum(axis=(0, 2, 3))
    dxhat = dout * gamma[None, :, None, None]
    sum_dxhat = dxhat.sum(axis=(0, 2, 3), keepdims=True)
    sum_dxhat_xhat = (dxhat * xhat).sum(axis=(0, 2, 3), keepdims=True)
    dx = (ivar[None, :, None, None] / n) * (n * dxhat - sum_dxhat - xhat * sum_dxhat_xhat)
    return dx, dgamma, dbeta


def leaky_relu_forward(x, slope: float):
    out = np.where(x > 0, x, slope * x)
    return out, (x > 0, slope)


def leaky_relu_backward(dout, cache):
    positive, slope = cache
    return np.where(positive, dout, slope * dout)


def pool2x2_forward(x, kind: str):
    """2x2 stride-2 pooling; odd trailing rows/columns are dropped."""
    B, C, H, W = x.shape
    h2, w2 = H // 2, W // 2
    xc = x[:, :, :h2 * 2, :w2 * 2]
    windows = xc.reshape(B, C, h2, 2, w2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(B, C, h2, w2, 4)
    if kind == "avg":
        return windows.mean(axis=4), (x.shape, None, "avg")
    idx = windows.argmax(axis=4)  # first max wins on ties: deterministic
    out = np.take_along_axis(windows, idx[..., None], axis=4)[..., 0]
    return out, (x.shape, idx, "max")


def pool2x2_backward(dout, cache):
    x_shape, idx, kind = cache
    B, C, H, W = x_shape
    h2, w2 = H // 2, W // 2
    dwin = np.zeros((B, C, h2, w2, 4), dtype=dout.dtype)
    if kind == "avg":
        dwin[:] = (dout / 4.0)[..., None]
    else:
        np.put_along_axis(dwin, idx[..., None], dout[..., None], axis=4)
    dx = np.zeros(x_shape, dtype=dout.dtype)
    dx[:, :, :h2 * 2, :w2 * 2] = (
        dwin.reshape(B, C, h2, w2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(B, C, h2 * 2, w2 * 2))
    return dx


def sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out
