"""Lightweight MLP that maps (blockage degrees, user position) to element-AP associations.

Input: N blockage degrees and the (x, y) position scaled to [0, 1] by the
room footprint. Three ReLU hidden layers, then M independent N-way softmax
heads, one per mirror element.

Serialised model format (text, one token stream per line)::

    vlcris-ann 1
    widths <N+2> <N1> <N2> <N3> <M*N>
    heads <M> <N>
    scale <room width> <room depth>
    W0 <row-major float values>
    b0 <float values>
    ...

Floats are written with ``repr`` so a load/save round trip is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

FORMAT_TAG = "vlcris-ann"
FORMAT_VERSION = 1


class TrainingDivergedError(RuntimeError):
    pass


@dataclass
class AnnModel:
    n_aps: int
    n_elements: int
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    scale: tuple[float, float] = (5.0, 5.0)

    def __post_init__(self):
        widths = self.widths
        if widths[0] != self.n_aps + 2 or widths[-1] != self.n_aps * self.n_elements:
            raise ValueError(f"layer widths {widths} do not match N={self.n_aps}, M={self.n_elements}")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if b.shape != (w.shape[1],) or (k and w.shape[0] != self.weights[k - 1].shape[1]):
                raise ValueError("layer dimensions do not chain")

    @property
    def widths(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def copy(self) -> "AnnModel":
        return AnnModel(self.n_aps, self.n_elements, [w.copy() for w in self.weights],
                        [b.copy() for b in self.biases], self.scale)


def init_model(n_aps: int, n_elements: int, hidden=(64, 64, 32), seed: int = 0,
               scale=(5.0, 5.0)) -> AnnModel:
    """He-initialised weights, zero biases."""
    rng = np.random.default_rng(seed)
    widths = (n_aps + 2, *hidden, n_aps * n_elements)
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return AnnModel(n_aps, n_elements, weights, biases, tuple(float(s) for s in scale))


def encode_inputs(model: AnnModel, xi, position) -> np.ndarray:
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    pos = np.atleast_2d(np.asarray(position, dtype=float))[:, :2]
    if xi.shape[1] != model.n_aps:
        raise ValueError(f"expected {model.n_aps} blockage degrees, got {xi.shape[1]}")
    return np.hstack([xi, pos / np.asarray(model.scale)])


def _softmax_heads(logits, n_elements, n_aps):
    z = logits.reshape(-1, n_elements, n_aps)
    z = z - z.max(axis=2, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=2, keepdims=True)


def _forward(model: AnnModel, x):
    acts = [x]
    a = x
    last = len(model.weights) - 1
    for k, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ w + b
        a = z if k == last else np.maximum(z, 0.0)
        acts.append(a)
    return acts


def ann_forward(model: AnnModel, xi, position) -> np.ndarray:
    """Per-element probability vectors over APs, shape (M, N) or (B, M, N)."""
    xi_arr = np.asarray(xi, dtype=float)
    x = encode_inputs(model, xi, position)
    if x.shape[1] != model.widths[0]:
        raise ValueError("input dimension mismatch")
    probs = _softmax_heads(_forward(model, x)[-1], model.n_elements, model.n_aps)
    return probs[0] if xi_arr.ndim == 1 else probs


def ann_predict(model: AnnModel, xi, position, candidates=None) -> np.ndarray:
    """Arg-max AP id per element, optionally restricted to ``candidates``.

    Ties resolve to the lowest AP id.
    """
    probs = ann_forward(model, xi, position)
    single = probs.ndim == 2
    if single:
        probs = probs[None]
    if candidates is not None:
        mask = np.zeros(model.n_aps, dtype=bool)
        mask[np.asarray(sorted(candidates), dtype=int) - 1] = True
        probs = np.where(mask[None, None, :], probs, -np.inf)
    ids = np.argmax(probs, axis=2) + 1
    return ids[0] if single else ids


def loss_and_grads(model: AnnModel, x, y):
    """Mean over samples of the summed per-head cross-entropy, and its gradient.

    ``x`` is the encoded input (B, N+2); ``y`` holds 0-based AP classes (B, M).
    Gradients come back in ``model.params()`` order.
    """
    acts = _forward(model, x)
    p = _softmax_heads(acts[-1], model.n_elements, model.n_aps)
    bsz = x.shape[0]
    rows = np.arange(bsz)[:, None]
    heads = np.arange(model.n_elements)[None, :]
    picked = p[rows, heads, y]
    loss = -np.log(np.maximum(picked, 1e-300)).sum() / bsz

    delta = p.copy()
    delta[rows, heads, y] -= 1.0
    delta = delta.reshape(bsz, -1) / bsz
    grads = []
    for k in range(len(model.weights) - 1, -1, -1):
        gw = acts[k].T @ delta
        gb = delta.sum(axis=0)
        grads = [gw, gb] + grads
        if k:
            delta = (delta @ model.weights[k].T) * (acts[k] > 0)
    return float(loss), grads


def ann_train(model: AnnModel, data, batch_size: int = 128, learning_rate: float = 1e-3,
              epochs: int = 60, seed: int = 0) -> tuple[AnnModel, list[float]]:
    """Adam mini-batch training on the summed per-head cross-entropy.

    ``data`` needs ``xi`` (S, N), ``position`` (S, 2) and ``labels`` (S, M,
    AP ids) attributes, e.g. a ``TrainingSet``. Returns the trained copy and
    the loss history: the loss before any update, then one full-set loss per
    epoch.
    """
    x = encode_inputs(model, data.xi, data.position)
    y = np.asarray(data.labels, dtype=int) - 1
    if x.shape[0] == 0:
        raise ValueError("empty training set")
    if y.min() < 0 or y.max() >= model.n_aps:
        raise ValueError("labels outside 1..N")
    model = model.copy()
    rng = np.random.default_rng(seed)
    params = model.params()
    m1 = [np.zeros_like(p) for p in params]
    m2 = [np.zeros_like(p) for p in params]
    b1, b2, eps = 0.9, 0.999, 1e-8
    step = 0
    history = [loss_and_grads(model, x, y)[0]]
    n = x.shape[0]
    for epoch in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            sel = order[start:start + batch_size]
            loss, grads = loss_and_grads(model, x[sel], y[sel])
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch starting {start}, lr={learning_rate}")
            step += 1
            for p, g, a, v in zip(params, grads, m1, m2):
                a *= b1
                a += (1 - b1) * g
                v *= b2
                v += (1 - b2) * g * g
                p -= learning_rate * (a / (1 - b1**step)) / (np.sqrt(v / (1 - b2**step)) + eps)
        full = loss_and_grads(model, x, y)[0]
        if not np.isfinite(full):
            raise TrainingDivergedError(f"non-finite loss after epoch {epoch}")
        history.append(full)
    return model, history


def save_model(model: AnnModel, path) -> None:
    lines = [f"{FORMAT_TAG} {FORMAT_VERSION}",
             "widths " + " ".join(str(w) for w in model.widths),
             f"heads {model.n_elements} {model.n_aps}",
             f"scale {model.scale[0]!r} {model.scale[1]!r}"]
    for k, (w, b) in enumerate(zip(model.weights, model.biases)):
        lines.append(f"W{k} " + " ".join(repr(float(v)) for v in w.ravel()))
        lines.append(f"b{k} " + " ".join(repr(float(v)) for v in b.ravel()))
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path) -> AnnModel:
    rows = Path(path).read_text().splitlines()
    head = rows[0].split()
    if len(head) != 2 or head[0] != FORMAT_TAG:
        raise ValueError(f"{path}: not a {FORMAT_TAG} file")
    if int(head[1]) != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {head[1]}")
    fields = {}
    for line in rows[1:]:
        if line.strip():
            key, _, rest = line.partition(" ")
            fields[key] = rest.split()
    widths = [int(v) for v in fields["widths"]]
    m, n = (int(v) for v in fields["heads"])
    scale = tuple(float(v) for v in fields["scale"])
    weights, biases = [], []
    for k, (fi, fo) in enumerate(zip(widths[:-1], widths[1:])):
        weights.append(np.array([float(v) for v in fields[f"W{k}"]]).reshape(fi, fo))
        biases.append(np.array([float(v) for v in fields[f"b{k}"]]))
    return AnnModel(n, m, weights, biases, scale)
