"""NumPy implementations of the hot kernels.

Same call signatures as the compiled extension (``_core.pyx``); used when the
extension is missing or ``SACFD_PURE_PYTHON`` is set. Both backends must stay
numerically interchangeable: the descent rule in ``tree_prefix_find`` and the
parent-recompute rule in ``tree_set`` are part of the contract.
"""

import numpy as np


def mlp_forward(weights, biases, x):
    """Run a ReLU MLP (linear output layer) on batch ``x``.

    Returns ``(out, acts)`` where ``acts[0]`` is the input and ``acts[i]`` the
    post-activation output of layer ``i``; that list is the backward cache.
    """
    acts = [x]
    h = x
    last = len(weights) - 1
    for i in range(len(weights)):
        h = h @ weights[i].T + biases[i]
        if i < last:
            np.maximum(h, 0.0, out=h)
        acts.append(h)
    return acts[-1], acts


def mlp_backward(weights, acts, grad_out):
    """Backprop ``grad_out`` through the cached forward pass.

    Returns ``(grad_weights, grad_biases, grad_input)``.
    """
    n = len(weights)
    grad_ws = [None] * n
    grad_bs = [None] * n
    g = grad_out
    for i in range(n - 1, -1, -1):
        grad_ws[i] = g.T @ acts[i]
        grad_bs[i] = g.sum(axis=0)
        g = g @ weights[i]
        if i > 0:
            g = g * (acts[i] > 0.0)
    return grad_ws, grad_bs, g


def tree_set(tree, cap, idx, value):
    """Set leaf ``idx`` and recompute ancestor sums.

    ``tree`` is a flat array of ``2*cap`` values, root at index 1, leaves at
    ``[cap, 2*cap)``; ``cap`` must be a power of two. Parents are recomputed
    as left+right (not delta-adjusted) so the root never drifts from the true
    leaf sum.
    """
    node = cap + idx
    tree[node] = value
    node >>= 1
    while node >= 1:
        tree[node] = tree[2 * node] + tree[2 * node + 1]
        node >>= 1


def tree_set_many(tree, cap, idxs, values):
    for i in range(len(idxs)):
        tree_set(tree, cap, int(idxs[i]), float(values[i]))


def tree_prefix_find(tree, cap, targets):
    """Descend from the root for each prefix-sum target; return leaf indices.

    Rule at each node: go right iff target > left-child sum, subtracting the
    left sum when doing so. Targets must lie in ``[0, total)``.
    """
    t = np.asarray(targets, dtype=np.float64).copy()
    node = np.ones(len(t), dtype=np.int64)
    if len(t) == 0:
        return node
    while node[0] < cap:
        left = tree[2 * node]
        go_right = t > left
        t -= np.where(go_right, left, 0.0)
        node = 2 * node + go_right
    return node - cap
