"""Fully connected networks with manual backprop, Adam, and checkpoint I/O.

A network is a list of ``(weight, bias)`` pairs: weight shaped ``(out, in)``,
bias ``(out,)``, ReLU between layers, linear output. Consecutive layer
dimensions must chain. All math is float64; the heavy passes go through
``sacfd._kernels`` (compiled or numpy backend).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

Params = list  # list[tuple[np.ndarray, np.ndarray]]

CHECKPOINT_VERSION = 1


class ConfigurationError(ValueError):
    """Shape or wiring mistake in caller-supplied network data."""


def init_mlp(sizes, rng: np.random.Generator, final_scale: float = 1.0) -> Params:
    """Build parameters for the layer widths in ``sizes``.

    Weights and biases are uniform in +-1/sqrt(fan_in); the last layer is
    additionally scaled by ``final_scale`` (policy heads use 1e-2 so initial
    actions sit near zero throttle).
    """
    if len(sizes) < 2:
        raise ConfigurationError("need at least an input and an output width")
    params = []
    for k in range(len(sizes) - 1):
        fan_in, fan_out = sizes[k], sizes[k + 1]
        bound = 1.0 / np.sqrt(fan_in)
        w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        b = rng.uniform(-bound, bound, size=fan_out)
        if k == len(sizes) - 2:
            w *= final_scale
            b *= final_scale
        params.append((w, b))
    return params


def check_params(params: Params) -> None:
    for k in range(len(params) - 1):
        if params[k + 1][0].shape[1] != params[k][0].shape[0]:
            raise ConfigurationError(
                f"layer {k} outputs {params[k][0].shape[0]} but layer {k + 1} "
                f"expects {params[k + 1][0].shape[1]}"
            )
    for w, b in params:
        if w.shape[0] != b.shape[0]:
            raise ConfigurationError("bias length must match weight rows")
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise ConfigurationError("non-finite parameter entries")


def _as_batch(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim == 1:
        return x[None, :], True
    return x, False


def forward(params: Params, x):
    """Evaluate the network; accepts a single vector or a batch."""
    out, _ = forward_cached(params, x)
    return out


def forward_cached(params: Params, x):
    """Evaluate and return ``(output, cache)``; the cache feeds ``backward``.

    The cache is the list of per-layer post-activations, input first.
    """
    xb, single = _as_batch(x)
    if xb.shape[1] != params[0][0].shape[1]:
        raise ConfigurationError(
            f"input width {xb.shape[1]} != first layer width {params[0][0].shape[1]}"
        )
    ws = [p[0] for p in params]
    bs = [p[1] for p in params]
    out, acts = _kernels.mlp_forward(ws, bs, xb)
    if single:
        return out[0], acts
    return out, acts


def backward(params: Params, cache, grad_out):
    """Backprop an upstream gradient through a cached forward pass.

    Returns ``(grads, grad_input)`` with ``grads`` shaped like ``params``.
    """
    g, single = _as_batch(grad_out)
    if g.shape != cache[-1].shape:
        raise ConfigurationError("upstream gradient shape does not match output")
    ws = [p[0] for p in params]
    gw, gb, gx = _kernels.mlp_backward(ws, cache, g)
    grads = list(zip(gw, gb))
    if single:
        return grads, gx[0]
    return grads, gx


@dataclass
class AdamState:
    """First/second moment accumulators shaped like the parameter list."""

    m: list
    v: list
    step: int = 0
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    skipped: int = field(default=0, compare=False)


def adam_init(params: Params, lr: float = 3e-4) -> AdamState:
    zeros = lambda p: [(np.zeros_like(w), np.zeros_like(b)) for w, b in p]
    return AdamState(m=zeros(params), v=zeros(params), lr=lr)


def adam_step(params: Params, grads: Params, state: AdamState):
    """One bias-corrected Adam update; pure in (params, grads, state).

    Returns ``(new_params, new_state, applied)``; a non-finite gradient skips
    the update (``applied=False``, skip counter bumped) instead of poisoning
    the parameters.
    """
    for gw, gb in grads:
        if not (np.isfinite(gw).all() and np.isfinite(gb).all()):
            new_state = AdamState(state.m, state.v, state.step, state.lr,
                                  state.beta1, state.beta2, state.eps,
                                  state.skipped + 1)
            return params, new_state, False
    t = state.step + 1
    c1 = 1.0 - state.beta1 ** t
    c2 = 1.0 - state.beta2 ** t
    new_params, new_m, new_v = [], [], []
    for (w, b), (gw, gb), (mw, mb), (vw, vb) in zip(params, grads, state.m, state.v):
        mw2 = state.beta1 * mw + (1 - state.beta1) * gw
        mb2 = state.beta1 * mb + (1 - state.beta1) * gb
        vw2 = state.beta2 * vw + (1 - state.beta2) * gw * gw
        vb2 = state.beta2 * vb + (1 - state.beta2) * gb * gb
        w2 = w - state.lr * (mw2 / c1) / (np.sqrt(vw2 / c2) + state.eps)
        b2 = b - state.lr * (mb2 / c1) / (np.sqrt(vb2 / c2) + state.eps)
        new_params.append((w2, b2))
        new_m.append((mw2, mb2))
        new_v.append((vw2, vb2))
    new_state = AdamState(new_m, new_v, t, state.lr, state.beta1, state.beta2,
                          state.eps, state.skipped)
    return new_params, new_state, True


def flatten(params: Params) -> np.ndarray:
    return np.concatenate([np.concatenate([w.ravel(), b]) for w, b in params])


def unflatten(template: Params, vec: np.ndarray) -> Params:
    out = []
    k = 0
    for w, b in template:
        nw = w.size
        out_w = np.ascontiguousarray(vec[k:k + nw].reshape(w.shape))
        k += nw
        out_b = vec[k:k + b.size].copy()
        k += b.size
        out.append((out_w, out_b))
    if k != vec.size:
        raise ConfigurationError("flat vector length does not match template")
    return out


def clone(params: Params) -> Params:
    return [(w.copy(), b.copy()) for w, b in params]


# --- checkpoint container ------------------------------------------------
# JSON with full-precision floats; round-trips bit-exactly.


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def params_to_jsonable(params: Params):
    return [
        {"shape": list(w.shape), "w": [_fmt(v) for v in w.ravel()],
         "b": [_fmt(v) for v in b]}
        for w, b in params
    ]


def params_from_jsonable(obj) -> Params:
    params = []
    for layer in obj:
        shape = tuple(layer["shape"])
        w = np.array([float(v) for v in layer["w"]], dtype=np.float64).reshape(shape)
        b = np.array([float(v) for v in layer["b"]], dtype=np.float64)
        params.append((np.ascontiguousarray(w), b))
    check_params(params)
    return params


def adam_to_jsonable(state: AdamState):
    return {
        "m": params_to_jsonable(state.m),
        "v": params_to_jsonable(state.v),
        "step": state.step,
        "lr": _fmt(state.lr),
        "skipped": state.skipped,
    }


def adam_from_jsonable(obj) -> AdamState:
    return AdamState(
        m=[(w, b) for w, b in params_from_jsonable(obj["m"])],
        v=[(w, b) for w, b in params_from_jsonable(obj["v"])],
        step=int(obj["step"]),
        lr=float(obj["lr"]),
        skipped=int(obj.get("skipped", 0)),
    )


def save_checkpoint(path, payload: dict) -> None:
    """Write a versioned JSON checkpoint (atomic rename)."""
    doc = {"version": CHECKPOINT_VERSION}
    doc.update(payload)
    tmp = str(path) + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(doc, fh, separators=(",", ":"))
    os.replace(tmp, str(path))


def load_checkpoint(path) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("version") != CHECKPOINT_VERSION:
        raise ConfigurationError(f"unsupported checkpoint version {doc.get('version')}")
    return doc
