"""Semi-supervised recursive autoencoder over headline token chains.

A headline ``x_1 .. x_n`` is folded left to right: the first autoencoder
encodes ``[x_1; x_2]``, every later one encodes ``[p_{i-1}; x_{i+1}]``. Each
internal node also reconstructs its two inputs and feeds its code to a
softmax classifier. Training minimises, averaged over headlines,

    alpha * sum(reconstruction errors) + (1 - alpha) * sum(node cross-entropies)

by full-batch gradient descent. Gradients are exact and flow into the word
embeddings, including through the reconstruction targets.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DegenerateLabelsError, EmptyHeadlineError, ModelLoadError, ShapeError, TrainingError

FORMAT = "adhoc_rae.rae"
VERSION = 1

EMB_MIN, EMB_MAX = 0.01, 0.99

PARAM_NAMES = ("embeddings", "W", "b", "W_dec", "b_dec", "W_cls", "b_cls")


@dataclass(frozen=True)
class RaeConfig:
    dim: int = 40
    iterations: int = 70
    learning_rate: float = 0.05
    alpha: float = 0.2
    seed: int = 0
    init_std: float = 0.1
    weight_std: float = 0.1
    n_classes: int = 2
    activation: str = "sigmoid"  # "tanh" drops the [0, 1] embedding box
    optimizer: str = "lbfgs"  # or "gd": fixed-step full-batch descent
    train_unk: bool = False
    unk_min_count: int = 2

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.n_classes < 2:
            raise ValueError("n_classes must be >= 2")
        if self.optimizer not in ("lbfgs", "gd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.activation not in ("sigmoid", "tanh"):
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def clip_embeddings(self) -> bool:
        return self.activation == "sigmoid"


@dataclass
class EmbeddingTable:
    """Word vectors; row ``len(terms)`` of ``matrix`` is the unknown-word vector."""

    terms: tuple[str, ...]
    matrix: np.ndarray
    init: tuple[float, float] = (0.5, 0.1)
    index_of: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.index_of = {t: i for i, t in enumerate(self.terms)}

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def unk_index(self) -> int:
        return len(self.terms)

    @property
    def vectors(self) -> np.ndarray:
        return self.matrix[: len(self.terms)]

    @property
    def unk_vector(self) -> np.ndarray:
        return self.matrix[len(self.terms)]

    def lookup(self, tokens: Sequence[str]) -> np.ndarray:
        unk = self.unk_index
        return np.array([self.index_of.get(t, unk) for t in tokens], dtype=np.int64)


@dataclass
class EncoderParams:
    W: np.ndarray  # (l, 2l)
    b: np.ndarray  # (l,)
    W_dec: np.ndarray  # (2l, l)
    b_dec: np.ndarray  # (2l,)


@dataclass
class SoftmaxParams:
    W_cls: np.ndarray  # (K, l)
    b_cls: np.ndarray  # (K,)

    @property
    def n_classes(self) -> int:
        return self.W_cls.shape[0]


@dataclass
class RaeModel:
    embeddings: EmbeddingTable
    encoder: EncoderParams
    softmax: SoftmaxParams
    config: RaeConfig
    loss_history: list[float] = field(default_factory=list)

    def arrays(self) -> dict[str, np.ndarray]:
        """Views of every trainable array, keyed as in :data:`PARAM_NAMES`."""
        e, s = self.encoder, self.softmax
        return {
            "embeddings": self.embeddings.matrix,
            "W": e.W, "b": e.b, "W_dec": e.W_dec, "b_dec": e.b_dec,
            "W_cls": s.W_cls, "b_cls": s.b_cls,
        }

    def copy(self) -> "RaeModel":
        a = {k: v.copy() for k, v in self.arrays().items()}
        return RaeModel(
            EmbeddingTable(self.embeddings.terms, a["embeddings"], self.embeddings.init),
            EncoderParams(a["W"], a["b"], a["W_dec"], a["b_dec"]),
            SoftmaxParams(a["W_cls"], a["b_cls"]),
            self.config,
            list(self.loss_history),
        )

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": VERSION,
            "config": asdict(self.config),
            "terms": list(self.embeddings.terms),
            "embedding_init": list(self.embeddings.init),
            "params": {k: v.tolist() for k, v in self.arrays().items()},
            "loss_history": list(self.loss_history),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RaeModel":
        if doc.get("format") != FORMAT:
            raise ModelLoadError(f"not an RAE model (format={doc.get('format')!r})")
        if doc.get("version") != VERSION:
            raise ModelLoadError(f"RAE model version mismatch: expected {VERSION}, found {doc.get('version')}")
        try:
            cfg = RaeConfig(**doc["config"])
            p = {k: np.asarray(doc["params"][k], dtype=float) for k in PARAM_NAMES}
            terms = tuple(doc["terms"])
            model = cls(
                EmbeddingTable(terms, p["embeddings"], tuple(doc["embedding_init"])),
                EncoderParams(p["W"], p["b"], p["W_dec"], p["b_dec"]),
                SoftmaxParams(p["W_cls"], p["b_cls"]),
                cfg,
                [float(x) for x in doc["loss_history"]],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelLoadError(f"malformed RAE model: {exc}") from exc
        _check_shapes(model)
        return model


def _check_shapes(model: RaeModel) -> None:
    l = model.embeddings.dim
    K = model.softmax.n_classes
    want = {
        "embeddings": (len(model.embeddings.terms) + 1, l),
        "W": (l, 2 * l), "b": (l,), "W_dec": (2 * l, l), "b_dec": (2 * l,),
        "W_cls": (K, l), "b_cls": (K,),
    }
    for name, arr in model.arrays().items():
        if arr.shape != want[name]:
            raise ShapeError(f"{name}: expected shape {want[name]}, got {arr.shape}")


# -- activations --------------------------------------------------------------


def sigmoid(z):
    """Logistic function, evaluated without overflow for large ``|z|``."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _act(kind: str):
    if kind == "sigmoid":
        return sigmoid, lambda y: y * (1.0 - y)
    return np.tanh, lambda y: 1.0 - y * y


def softmax(logits):
    z = np.asarray(logits, dtype=float)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _softmax_xent(logits: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    """Row-wise probabilities and the summed ``-log p[y]`` via log-sum-exp."""
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    s = e.sum(axis=1, keepdims=True)
    nll = np.log(s[:, 0]) - z[np.arange(len(y)), y]
    return e / s, float(nll.sum())


# -- single-node operations ------------------------------------------------------


def _check_len(name: str, v: np.ndarray, n: int) -> None:
    if v.shape != (n,):
        raise ShapeError(f"{name}: expected length {n}, got shape {v.shape}")


def encode_pair(c_left, c_right, enc: EncoderParams, activation: str = "sigmoid") -> np.ndarray:
    l = enc.W.shape[0]
    c_left, c_right = np.asarray(c_left, dtype=float), np.asarray(c_right, dtype=float)
    _check_len("left child", c_left, l)
    _check_len("right child", c_right, l)
    f, _ = _act(activation)
    return f(enc.W @ np.concatenate([c_left, c_right]) + enc.b)


def decode_pair(p, enc: EncoderParams, activation: str = "sigmoid") -> tuple[np.ndarray, np.ndarray]:
    l = enc.W_dec.shape[1]
    p = np.asarray(p, dtype=float)
    _check_len("code", p, l)
    f, _ = _act(activation)
    z = f(enc.W_dec @ p + enc.b_dec)
    return z[:l], z[l:]


def reconstruction_error(x_left, x_right, z_left, z_right) -> float:
    dl = np.asarray(x_left, dtype=float) - np.asarray(z_left, dtype=float)
    dr = np.asarray(x_right, dtype=float) - np.asarray(z_right, dtype=float)
    return 0.5 * float(dl @ dl + dr @ dr)


def classify_node(code, sm: SoftmaxParams) -> np.ndarray:
    code = np.asarray(code, dtype=float)
    _check_len("code", code, sm.W_cls.shape[1])
    return softmax(sm.W_cls @ code + sm.b_cls)


# -- chains -----------------------------------------------------------------------


@dataclass
class ChainNode:
    code: np.ndarray
    left_input: np.ndarray
    right_input: np.ndarray
    z_left: np.ndarray | None
    z_right: np.ndarray | None
    probs: np.ndarray


@dataclass
class RaeChain:
    leaves: np.ndarray  # (n, l)
    nodes: list[ChainNode]
    root_probs: np.ndarray

    @property
    def root_code(self) -> np.ndarray:
        return self.nodes[-1].code if self.nodes else self.leaves[0]


def build_chain(tokens: Sequence[str], model: RaeModel, decode: bool = True) -> RaeChain:
    """Fold a headline into its chain of autoencoder nodes.

    A single token yields no internal node; its embedding is the root code.
    """
    if len(tokens) == 0:
        raise EmptyHeadlineError("cannot build a chain for an empty headline")
    act = model.config.activation
    leaves = model.embeddings.matrix[model.embeddings.lookup(tokens)]
    nodes = []
    c = leaves[0]
    for x in leaves[1:]:
        p = encode_pair(c, x, model.encoder, act)
        zl, zr = decode_pair(p, model.encoder, act) if decode else (None, None)
        nodes.append(ChainNode(p, c, x, zl, zr, classify_node(p, model.softmax)))
        c = p
    root_probs = nodes[-1].probs if nodes else classify_node(leaves[0], model.softmax)
    return RaeChain(leaves, nodes, root_probs)


# -- batched loss and gradients -------------------------------------------------------


@dataclass
class Gradients:
    embeddings: np.ndarray
    W: np.ndarray
    b: np.ndarray
    W_dec: np.ndarray
    b_dec: np.ndarray
    W_cls: np.ndarray
    b_cls: np.ndarray

    def items(self):
        return ((k, getattr(self, k)) for k in PARAM_NAMES)

    def max_abs(self) -> float:
        return max(float(np.abs(v).max()) if v.size else 0.0 for _, v in self.items())


def _encode_batch(sequences, model: RaeModel) -> list[np.ndarray]:
    out = []
    for s in sequences:
        if isinstance(s, np.ndarray):
            idx = s.astype(np.int64)
        else:
            idx = model.embeddings.lookup(s)
        if len(idx) == 0:
            raise EmptyHeadlineError("empty headline in batch")
        out.append(idx)
    return out


def _check_labels(labels, n: int, K: int) -> np.ndarray:
    y = np.asarray(labels, dtype=np.int64)
    if y.shape != (n,):
        raise ValueError(f"need one label per chain: {n} chains, {y.shape} labels")
    if n and (y.min() < 0 or y.max() >= K):
        raise ValueError(f"labels must lie in 0..{K - 1}")
    return y


def _forward_backward(sequences, labels, model: RaeModel, want_grad: bool):
    cfg = model.config
    E = model.embeddings.matrix
    enc, sm = model.encoder, model.softmax
    W, b, W_dec, b_dec, W_cls, b_cls = enc.W, enc.b, enc.W_dec, enc.b_dec, sm.W_cls, sm.b_cls
    l, K = E.shape[1], W_cls.shape[0]
    alpha = cfg.alpha
    f, df = _act(cfg.activation)

    seqs = _encode_batch(sequences, model)
    B = len(seqs)
    if B == 0:
        raise ValueError("empty batch")
    y = _check_labels(labels, B, K)
    lengths = np.array([len(s) for s in seqs])
    T = int(lengths.max())
    idx = np.zeros((B, T), dtype=np.int64)
    for r, s in enumerate(seqs):
        idx[r, : len(s)] = s
    onehot = np.eye(K)[y]

    c = E[idx[:, 0]].copy()
    steps = []
    rec_sum = 0.0
    ce_sum = 0.0
    for i in range(1, T):
        rows = np.flatnonzero(lengths > i)
        u = np.concatenate([c[rows], E[idx[rows, i]]], axis=1)
        p = f(u @ W.T + b)
        z = f(p @ W_dec.T + b_dec)
        q, nll = _softmax_xent(p @ W_cls.T + b_cls, y[rows])
        diff = u - z
        rec_sum += 0.5 * float(np.sum(diff * diff))
        ce_sum += nll
        c[rows] = p
        steps.append((rows, u, p, z, q))
    single = np.flatnonzero(lengths == 1)
    if len(single):
        x1 = E[idx[single, 0]]
        q1, nll = _softmax_xent(x1 @ W_cls.T + b_cls, y[single])
        ce_sum += nll

    R = rec_sum / B
    C = ce_sum / B
    loss = alpha * R + (1.0 - alpha) * C
    if not want_grad:
        return loss, R, C, None

    g = Gradients(*(np.zeros_like(a) for a in (E, W, b, W_dec, b_dec, W_cls, b_cls)))
    dc = np.zeros((B, l))
    wr, wc = alpha / B, (1.0 - alpha) / B
    for i in range(T - 1, 0, -1):
        rows, u, p, z, q = steps[i - 1]
        dlog = wc * (q - onehot[rows])
        g.W_cls += dlog.T @ p
        g.b_cls += dlog.sum(axis=0)
        diff = u - z
        ddec = -wr * diff * df(z)
        g.W_dec += ddec.T @ p
        g.b_dec += ddec.sum(axis=0)
        gp = dc[rows] + dlog @ W_cls + ddec @ W_dec
        da = gp * df(p)
        g.W += da.T @ u
        g.b += da.sum(axis=0)
        gu = da @ W + wr * diff
        np.add.at(g.embeddings, idx[rows, i], gu[:, l:])
        dc[rows] = gu[:, :l]
    multi = np.flatnonzero(lengths > 1)
    np.add.at(g.embeddings, idx[multi, 0], dc[multi])
    if len(single):
        dlog = wc * (q1 - onehot[single])
        g.W_cls += dlog.T @ x1
        g.b_cls += dlog.sum(axis=0)
        np.add.at(g.embeddings, idx[single, 0], dlog @ W_cls)
    return loss, R, C, g


def total_loss(sequences, labels, model: RaeModel) -> float:
    """Mean over headlines of ``alpha * R + (1 - alpha) * C``."""
    return _forward_backward(sequences, labels, model, want_grad=False)[0]


def loss_components(sequences, labels, model: RaeModel) -> tuple[float, float]:
    """Mean summed reconstruction error and mean summed cross-entropy."""
    _, R, C, _ = _forward_backward(sequences, labels, model, want_grad=False)
    return R, C


def compute_gradients(sequences, labels, model: RaeModel) -> Gradients:
    return _forward_backward(sequences, labels, model, want_grad=True)[3]


def value_and_gradients(sequences, labels, model: RaeModel) -> tuple[float, Gradients]:
    loss, _, _, g = _forward_backward(sequences, labels, model, want_grad=True)
    return loss, g


def numeric_gradient(sequences, labels, model: RaeModel, epsilon: float = 1e-5) -> Gradients:
    """Central differences for every coordinate. Slow; for checking only."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    work = model.copy()
    seqs = _encode_batch(sequences, work)
    out = {}
    for name, arr in work.arrays().items():
        grad = np.zeros_like(arr)
        flat, gflat = arr.reshape(-1), grad.reshape(-1)
        for k in range(flat.size):
            old = flat[k]
            flat[k] = old + epsilon
            up = total_loss(seqs, labels, work)
            flat[k] = old - epsilon
            down = total_loss(seqs, labels, work)
            flat[k] = old
            gflat[k] = (up - down) / (2.0 * epsilon)
        out[name] = grad
    return Gradients(**out)


# -- training and prediction ------------------------------------------------------------


def init_model(terms: Sequence[str], config: RaeConfig) -> RaeModel:
    """Gaussian initialisation; word vectors centred at 0.5 for the sigmoid
    decoder and clipped into its range, weight matrices small, biases zero."""
    rng = np.random.default_rng(config.seed)
    l, K = config.dim, config.n_classes
    mean = 0.5 if config.clip_embeddings else 0.0
    E = rng.normal(mean, config.init_std, size=(len(terms) + 1, l))
    if config.clip_embeddings:
        np.clip(E, EMB_MIN, EMB_MAX, out=E)
    W = rng.normal(0.0, config.weight_std, size=(l, 2 * l))
    W_dec = rng.normal(0.0, config.weight_std, size=(2 * l, l))
    W_cls = rng.normal(0.0, config.weight_std, size=(K, l))
    return RaeModel(
        EmbeddingTable(tuple(terms), E, (mean, config.init_std)),
        EncoderParams(W, np.zeros(l), W_dec, np.zeros(2 * l)),
        SoftmaxParams(W_cls, np.zeros(K)),
        config,
    )


def rae_vocabulary(corpus: Sequence[Sequence[str]], config: RaeConfig) -> list[str]:
    counts = Counter(t for toks in corpus for t in toks)
    floor = config.unk_min_count if config.train_unk else 1
    return sorted(t for t, c in counts.items() if c >= floor)


def gradient_step(model: RaeModel, grads: Gradients, learning_rate: float) -> None:
    """In-place ``theta -= eta * grad``, then clip word vectors if configured."""
    for name, arr in model.arrays().items():
        arr -= learning_rate * getattr(grads, name)
    if model.config.clip_embeddings:
        np.clip(model.embeddings.matrix, EMB_MIN, EMB_MAX, out=model.embeddings.matrix)


def train_rae(corpus: Sequence[Sequence[str]], labels: Sequence[int], config: RaeConfig = RaeConfig(),
              callback=None) -> RaeModel:
    """Fit a model for exactly ``config.iterations`` optimiser iterations.

    ``optimizer="gd"`` takes fixed steps ``theta -= learning_rate * grad`` and
    clips word vectors back into [0.01, 0.99] after each one. ``"lbfgs"``
    runs L-BFGS-B with the same box as bounds on the word vectors.
    ``loss_history[k]`` is the loss after iteration ``k + 1``; ``callback``,
    if given, is called as ``callback(iteration, loss)``.
    """
    corpus = [list(t) for t in corpus]
    if not corpus:
        raise DegenerateLabelsError("empty training corpus")
    if any(len(t) == 0 for t in corpus):
        raise EmptyHeadlineError("training corpus contains an empty headline")
    y = _check_labels(labels, len(corpus), config.n_classes)
    if len(np.unique(y)) < 2:
        raise DegenerateLabelsError("RAE training needs >= 2 classes among the labels")
    model = init_model(rae_vocabulary(corpus, config), config)
    seqs = _encode_batch(corpus, model)
    if config.optimizer == "gd":
        _fit_gd(model, seqs, y, callback)
    else:
        _fit_lbfgs(model, seqs, y, callback)
    return model


def _record(model: RaeModel, loss: float, callback) -> None:
    if not math.isfinite(loss):
        raise TrainingError(f"non-finite loss at iteration {len(model.loss_history)}")
    model.loss_history.append(float(loss))
    if callback is not None:
        callback(len(model.loss_history) - 1, loss)


def _fit_gd(model: RaeModel, seqs, y, callback) -> None:
    cfg = model.config
    loss, grads = value_and_gradients(seqs, y, model)
    for it in range(cfg.iterations):
        if not cfg.train_unk:
            grads.embeddings[model.embeddings.unk_index] = 0.0
        gradient_step(model, grads, cfg.learning_rate)
        if it + 1 < cfg.iterations:
            loss, grads = value_and_gradients(seqs, y, model)
        else:
            loss = total_loss(seqs, y, model)
        _record(model, loss, callback)


def _fit_lbfgs(model: RaeModel, seqs, y, callback) -> None:
    from scipy.optimize import minimize

    cfg = model.config
    arrays = model.arrays()
    names = list(PARAM_NAMES)
    sizes = [arrays[k].size for k in names]
    offsets = np.cumsum([0] + sizes)

    def unpack(theta):
        for k, a, b in zip(names, offsets[:-1], offsets[1:]):
            arrays[k][...] = theta[a:b].reshape(arrays[k].shape)

    last = {}

    def fun(theta):
        unpack(theta)
        loss, g = value_and_gradients(seqs, y, model)
        last["x"], last["f"] = theta.copy(), loss
        return loss, np.concatenate([getattr(g, k).ravel() for k in names])

    def on_iter(xk):
        if "x" in last and np.array_equal(xk, last["x"]):
            loss = last["f"]
        else:
            unpack(xk)
            loss = total_loss(seqs, y, model)
        _record(model, loss, callback)

    theta0 = np.concatenate([arrays[k].ravel() for k in names])
    n_emb = sizes[0]
    lo, hi = (EMB_MIN, EMB_MAX) if cfg.clip_embeddings else (None, None)
    bounds = [(lo, hi)] * n_emb + [(None, None)] * (len(theta0) - n_emb)
    if not cfg.train_unk:
        l = model.embeddings.dim
        u0 = model.embeddings.unk_index * l
        for j in range(u0, u0 + l):
            bounds[j] = (theta0[j], theta0[j])
    res = minimize(
        fun, theta0, jac=True, method="L-BFGS-B", bounds=bounds, callback=on_iter,
        options={"maxiter": cfg.iterations, "ftol": 0.0, "gtol": 0.0, "maxfun": 20 * cfg.iterations},
    )
    unpack(res.x)
    if not model.loss_history:
        _record(model, total_loss(seqs, y, model), callback)


def predict_rae(model: RaeModel, tokens: Sequence[str]) -> tuple[int, np.ndarray]:
    """Class and probabilities at the root code; ties go to the lower class."""
    chain = build_chain(tokens, model, decode=False)
    probs = chain.root_probs
    return int(np.argmax(probs)), probs


def predict_many(model: RaeModel, corpus: Sequence[Sequence[str]]) -> list[int]:
    return [predict_rae(model, t)[0] for t in corpus]


def with_zero_decoder(model: RaeModel) -> RaeModel:
    m = model.copy()
    m.encoder.W_dec[:] = 0.0
    m.encoder.b_dec[:] = 0.0
    return m


def random_model(terms: Sequence[str], config: RaeConfig, scale: float = 0.5) -> RaeModel:
    """Model with every parameter drawn at ``scale``; used for gradient checks
    where the near-zero training initialisation would hide errors."""
    m = init_model(terms, config)
    rng = np.random.default_rng(config.seed + 1)
    for name, arr in m.arrays().items():
        if name == "embeddings":
            continue
        arr[...] = rng.normal(0.0, scale, size=arr.shape)
    if config.clip_embeddings:
        m.embeddings.matrix[...] = rng.uniform(0.1, 0.9, size=m.embeddings.matrix.shape)
    return m


def save_rae(model: RaeModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), separators=(",", ":")) + "\n", encoding="utf-8")


def load_rae(path: str | Path) -> RaeModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelLoadError(f"cannot read RAE model {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelLoadError(f"{path}: not a model document")
    return RaeModel.from_dict(doc)


def write_loss_history(model: RaeModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("iteration,loss\n")
        for i, v in enumerate(model.loss_history):
            fh.write(f"{i},{v!r}\n")


__all__ = [
    "RaeConfig", "RaeModel", "EmbeddingTable", "EncoderParams", "SoftmaxParams", "RaeChain",
    "Gradients", "sigmoid", "softmax", "encode_pair", "decode_pair", "reconstruction_error",
    "classify_node", "build_chain", "total_loss", "loss_components", "compute_gradients",
    "numeric_gradient", "init_model", "random_model", "train_rae", "predict_rae", "predict_many",
    "save_rae", "load_rae", "write_loss_history",
]
