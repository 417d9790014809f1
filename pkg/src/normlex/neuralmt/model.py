"""Character-level sequence-to-sequence translation model on plain numpy.

Encoder: character embedding -> multi-width convolution (same-length
padding, tanh) -> max pooling over successive windows of ``pool_interval``
positions (the tail window pools whatever remains, so the pooled length is
ceil(L / k)) -> highway layers -> bidirectional GRU.

Decoder: a stack of GRU layers with additive attention over the encoder
states.  The first layer consumes the previous target character embedding
concatenated with the attention context; the readout projects
[top state; context] onto the target vocabulary.  Decoder initial states
are projected from the mean encoder state.

Everything is float64 and deterministic given the seed.  The backward
passes are hand-written; gradcheck validates them against central finite
differences.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import NormlexError
from .config import ModelConfig
from .vocab import BOS, EOS, PAD, UNK, CharVocab


class EmptySource(NormlexError):
    """Source string is empty."""


@dataclass(frozen=True)
class EncoderStates:
    """Sequence of encoder state vectors (count x 2*encoder_hidden)."""

    states: np.ndarray
    count: int


@dataclass
class TranslationModel:
    config: ModelConfig
    source_vocab: CharVocab
    target_vocab: CharVocab
    params: dict[str, np.ndarray]


@dataclass(frozen=True)
class TrainingExample:
    """A source phrase with one or more admissible translations."""

    source: str
    targets: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.source:
            raise ValueError("empty source in training example")
        if not self.targets or any(not t for t in self.targets):
            raise ValueError("training example needs non-empty targets")


def expected_param_shapes(
    config: ModelConfig, source_vocab_size: int, target_vocab_size: int
) -> dict[str, tuple[int, ...]]:
    """Parameter tensor shapes as a pure function of config and vocab sizes."""
    d = config.embed_dim
    c = config.total_filters
    h = config.encoder_hidden
    hd = config.decoder_hidden
    a = config.attention_dim
    shapes: dict[str, tuple[int, ...]] = {"src_embed": (source_vocab_size, d)}
    for w, n_w in zip(config.conv_filter_widths, config.conv_filter_counts):
        shapes[f"conv_w{w}"] = (w * d, n_w)
        shapes[f"conv_b{w}"] = (n_w,)
    for layer in range(1, config.highway_layers + 1):
        shapes[f"hw{layer}_wt"] = (c, c)
        shapes[f"hw{layer}_bt"] = (c,)
        shapes[f"hw{layer}_wh"] = (c, c)
        shapes[f"hw{layer}_bh"] = (c,)
    for direction in ("fw", "bw"):
        shapes[f"enc_{direction}_wx"] = (c, 3 * h)
        shapes[f"enc_{direction}_wh"] = (h, 3 * h)
        shapes[f"enc_{direction}_b"] = (3 * h,)
    shapes["tgt_embed"] = (target_vocab_size, d)
    for layer in range(1, config.decoder_layers + 1):
        shapes[f"dec{layer}_init_w"] = (2 * h, hd)
        shapes[f"dec{layer}_init_b"] = (hd,)
    shapes["att_ws"] = (hd, a)
    shapes["att_ue"] = (2 * h, a)
    shapes["att_v"] = (a,)
    for layer in range(1, config.decoder_layers + 1):
        in_dim = d + 2 * h if layer == 1 else hd
        shapes[f"dec{layer}_wx"] = (in_dim, 3 * hd)
        shapes[f"dec{layer}_wh"] = (hd, 3 * hd)
        shapes[f"dec{layer}_b"] = (3 * hd,)
    shapes["out_w"] = (hd + 2 * h, target_vocab_size)
    shapes["out_b"] = (target_vocab_size,)
    return shapes


def _is_bias(name: str) -> bool:
    return name.rsplit("_", 1)[-1].startswith("b")


def init_parameters(
    config: ModelConfig, source_vocab_size: int, target_vocab_size: int
) -> dict[str, np.ndarray]:
    """Seeded uniform(-0.05, 0.05) weights, zero biases."""
    rng = np.random.default_rng(config.seed)
    params: dict[str, np.ndarray] = {}
    for name, shape in expected_param_shapes(
        config, source_vocab_size, target_vocab_size
    ).items():
        if _is_bias(name):
            params[name] = np.zeros(shape)
        else:
            params[name] = rng.uniform(-0.05, 0.05, size=shape)
    return params


def shape_audit(model: TranslationModel) -> None:
    """Raise if any parameter tensor deviates from its expected shape."""
    expected = expected_param_shapes(
        model.config, len(model.source_vocab), len(model.target_vocab)
    )
    mismatches = []
    for name, shape in expected.items():
        actual = model.params.get(name)
        if actual is None:
            mismatches.append(f"{name}: missing")
        elif actual.shape != shape:
            mismatches.append(f"{name}: expected {shape}, got {actual.shape}")
    extra = set(model.params) - set(expected)
    mismatches.extend(f"{name}: unexpected tensor" for name in sorted(extra))
    if mismatches:
        raise ValueError("parameter shape audit failed: " + "; ".join(mismatches))


def new_model(
    config: ModelConfig, source_vocab: CharVocab, target_vocab: CharVocab
) -> TranslationModel:
    params = init_parameters(config, len(source_vocab), len(target_vocab))
    return TranslationModel(
        config=config, source_vocab=source_vocab, target_vocab=target_vocab, params=params
    )


def zero_gradients(model: TranslationModel) -> dict[str, np.ndarray]:
    return {name: np.zeros_like(tensor) for name, tensor in model.params.items()}


def parameter_checksum(model: TranslationModel) -> str:
    """SHA-256 over all parameter bytes in registry order."""
    digest = hashlib.sha256()
    for name in sorted(model.params):
        digest.update(name.encode("utf-8"))
        digest.update(model.params[name].tobytes())
    return digest.hexdigest()


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # overflow in exp saturates to the correct limit values
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


def _softmax(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max()
    e = np.exp(shifted)
    return e / e.sum()


def _log_softmax(x: np.ndarray) -> np.ndarray:
    m = x.max()
    shifted = x - m
    return shifted - np.log(np.exp(shifted).sum())


def _gru_step(x, h, wx, wh, b, hidden):
    """One GRU step; gate order [reset, update, candidate]."""
    gx = x @ wx + b
    gh = h @ wh
    rz = _sigmoid(gx[: 2 * hidden] + gh[: 2 * hidden])
    r = rz[:hidden]
    z = rz[hidden:]
    gh_n = gh[2 * hidden :]
    n = np.tanh(gx[2 * hidden :] + r * gh_n)
    h_new = (1.0 - z) * n + z * h
    return h_new, (x, h, r, z, n, gh_n)


def _gru_step_backward(dh_new, cache, wx, wh, hidden):
    """Backward of one GRU step.

    Returns (dx, dh_prev, dgates_x, dgates_h); the weight gradients are
    accumulated by the caller from the stacked per-step gate gradients.
    """
    x, h, r, z, n, gh_n = cache
    dn = dh_new * (1.0 - z)
    dz = dh_new * (h - n)
    dh = dh_new * z
    dn_pre = dn * (1.0 - n * n)
    dr = dn_pre * gh_n
    dgx = np.empty(3 * hidden)
    dgx[:hidden] = dr * r * (1.0 - r)
    dgx[hidden : 2 * hidden] = dz * z * (1.0 - z)
    dgx[2 * hidden :] = dn_pre
    dgh = dgx.copy()
    dgh[2 * hidden :] *= r
    dx = wx @ dgx
    dh += wh @ dgh
    return dx, dh, dgx, dgh


class _GruGradCollector:
    """Stacks per-step GRU tensors so weight grads become single matmuls."""

    __slots__ = ("xs", "hs", "dgxs", "dghs")

    def __init__(self) -> None:
        self.xs: list[np.ndarray] = []
        self.hs: list[np.ndarray] = []
        self.dgxs: list[np.ndarray] = []
        self.dghs: list[np.ndarray] = []

    def add(self, cache, dgx, dgh) -> None:
        self.xs.append(cache[0])
        self.hs.append(cache[1])
        self.dgxs.append(dgx)
        self.dghs.append(dgh)

    def flush(self, grads: dict[str, np.ndarray], prefix: str) -> None:
        if not self.xs:
            return
        dgx = np.stack(self.dgxs)
        dgh = np.stack(self.dghs)
        grads[f"{prefix}_wx"] += np.stack(self.xs).T @ dgx
        grads[f"{prefix}_wh"] += np.stack(self.hs).T @ dgh
        grads[f"{prefix}_b"] += dgx.sum(axis=0)


def _encode_ids(model: TranslationModel, ids: list[int]):
    """Encoder forward; returns (states (T, 2H), cache for backward)."""
    cfg = model.config
    p = model.params
    k = cfg.pool_interval
    h_size = cfg.encoder_hidden
    x = p["src_embed"][ids]  # (L, D)
    length = len(ids)
    d = x.shape[1]

    conv_parts = []
    conv_caches = []
    for w in cfg.conv_filter_widths:
        left = (w - 1) // 2
        xp = np.zeros((length + w - 1, d))
        xp[left : left + length] = x
        win = sliding_window_view(xp, w, axis=0)  # (L, D, w)
        win = win.transpose(0, 2, 1).reshape(length, w * d)
        conv_parts.append(win @ p[f"conv_w{w}"] + p[f"conv_b{w}"])
        conv_caches.append((w, win))
    pre_act = np.concatenate(conv_parts, axis=1)  # (L, total_filters)
    act = np.tanh(pre_act)

    pooled_len = -(-length // k)
    n_channels = act.shape[1]
    cols = np.arange(n_channels)
    pooled = np.empty((pooled_len, n_channels))
    argmax_rows = np.empty((pooled_len, n_channels), dtype=np.intp)
    for t in range(pooled_len):
        seg = act[t * k : min((t + 1) * k, length)]
        rows = t * k + seg.argmax(axis=0)
        argmax_rows[t] = rows
        pooled[t] = act[rows, cols]

    hw_input = pooled
    hw_caches = []
    for layer in range(1, cfg.highway_layers + 1):
        gate = _sigmoid(hw_input @ p[f"hw{layer}_wt"] + p[f"hw{layer}_bt"])
        cand = np.tanh(hw_input @ p[f"hw{layer}_wh"] + p[f"hw{layer}_bh"])
        hw_caches.append((hw_input, gate, cand))
        hw_input = gate * cand + (1.0 - gate) * hw_input
    gru_in = hw_input  # (T, C)

    fw_states = np.empty((pooled_len, h_size))
    fw_caches = []
    hidden = np.zeros(h_size)
    for t in range(pooled_len):
        hidden, cache = _gru_step(
            gru_in[t], hidden, p["enc_fw_wx"], p["enc_fw_wh"], p["enc_fw_b"], h_size
        )
        fw_states[t] = hidden
        fw_caches.append(cache)
    bw_states = np.empty((pooled_len, h_size))
    bw_caches: list = [None] * pooled_len
    hidden = np.zeros(h_size)
    for t in range(pooled_len - 1, -1, -1):
        hidden, cache = _gru_step(
            gru_in[t], hidden, p["enc_bw_wx"], p["enc_bw_wh"], p["enc_bw_b"], h_size
        )
        bw_states[t] = hidden
        bw_caches[t] = cache

    states = np.concatenate([fw_states, bw_states], axis=1)
    cache = (ids, x, conv_caches, act, argmax_rows, length, hw_caches, fw_caches, bw_caches)
    return states, cache


def _encode_backward(model: TranslationModel, cache, d_states, grads) -> None:
    cfg = model.config
    p = model.params
    h_size = cfg.encoder_hidden
    ids, x, conv_caches, act, argmax_rows, length, hw_caches, fw_caches, bw_caches = cache
    pooled_len = d_states.shape[0]

    d_gru_in = np.zeros((pooled_len, act.shape[1]))
    collector = _GruGradCollector()
    wx, wh = p["enc_fw_wx"], p["enc_fw_wh"]
    dh = np.zeros(h_size)
    for t in range(pooled_len - 1, -1, -1):
        dx, dh, dgx, dgh = _gru_step_backward(
            d_states[t, :h_size] + dh, fw_caches[t], wx, wh, h_size
        )
        collector.add(fw_caches[t], dgx, dgh)
        d_gru_in[t] += dx
    collector.flush(grads, "enc_fw")
    # reverse-direction GRU ran right-to-left, so its backward runs left-to-right
    collector = _GruGradCollector()
    wx, wh = p["enc_bw_wx"], p["enc_bw_wh"]
    dh = np.zeros(h_size)
    for t in range(pooled_len):
        dx, dh, dgx, dgh = _gru_step_backward(
            d_states[t, h_size:] + dh, bw_caches[t], wx, wh, h_size
        )
        collector.add(bw_caches[t], dgx, dgh)
        d_gru_in[t] += dx
    collector.flush(grads, "enc_bw")

    d_hw = d_gru_in
    for layer in range(cfg.highway_layers, 0, -1):
        hw_input, gate, cand = hw_caches[layer - 1]
        d_gate = d_hw * (cand - hw_input)
        d_cand = d_hw * gate
        d_input = d_hw * (1.0 - gate)
        d_gate_pre = d_gate * gate * (1.0 - gate)
        d_cand_pre = d_cand * (1.0 - cand * cand)
        grads[f"hw{layer}_wt"] += hw_input.T @ d_gate_pre
        grads[f"hw{layer}_bt"] += d_gate_pre.sum(axis=0)
        grads[f"hw{layer}_wh"] += hw_input.T @ d_cand_pre
        grads[f"hw{layer}_bh"] += d_cand_pre.sum(axis=0)
        d_input += d_gate_pre @ p[f"hw{layer}_wt"].T + d_cand_pre @ p[f"hw{layer}_wh"].T
        d_hw = d_input

    d_act = np.zeros_like(act)
    cols = np.arange(act.shape[1])
    for t in range(pooled_len):
        # (row, col) pairs are unique within a pooled position
        d_act[argmax_rows[t], cols] += d_hw[t]
    d_pre = d_act * (1.0 - act * act)

    d_x = np.zeros_like(x)
    d = x.shape[1]
    offset = 0
    for (w, win), n_w in zip(conv_caches, cfg.conv_filter_counts):
        dz = d_pre[:, offset : offset + n_w]
        grads[f"conv_w{w}"] += win.T @ dz
        grads[f"conv_b{w}"] += dz.sum(axis=0)
        d_win = (dz @ p[f"conv_w{w}"].T).reshape(length, w, d)
        d_xp = np.zeros((length + w - 1, d))
        for i in range(w):
            d_xp[i : i + length] += d_win[:, i, :]
        left = (w - 1) // 2
        d_x += d_xp[left : left + length]
        offset += n_w
    np.add.at(grads["src_embed"], ids, d_x)


def _decoder_forward(model: TranslationModel, enc: np.ndarray, in_ids, out_ids):
    """Teacher-forced decoder forward; returns (mean loss, cache)."""
    cfg = model.config
    p = model.params
    hd = cfg.decoder_hidden
    n_layers = cfg.decoder_layers
    enc_mean = enc.mean(axis=0)
    enc_proj = enc @ p["att_ue"]  # (T, A)

    states = []
    for layer in range(1, n_layers + 1):
        states.append(np.tanh(enc_mean @ p[f"dec{layer}_init_w"] + p[f"dec{layer}_init_b"]))
    init_states = list(states)

    steps = []
    loss_sum = 0.0
    n_steps = len(out_ids)
    d = cfg.embed_dim
    for j in range(n_steps):
        y_in = in_ids[j]
        s_top_prev = states[-1]
        u = np.tanh(enc_proj + s_top_prev @ p["att_ws"])
        alpha = _softmax(u @ p["att_v"])
        ctx = alpha @ enc
        x = np.empty(d + enc.shape[1])
        x[:d] = p["tgt_embed"][y_in]
        x[d:] = ctx
        layer_caches = []
        prev_states = states
        states = []
        layer_in = x
        for layer in range(1, n_layers + 1):
            h_new, cache = _gru_step(
                layer_in,
                prev_states[layer - 1],
                p[f"dec{layer}_wx"],
                p[f"dec{layer}_wh"],
                p[f"dec{layer}_b"],
                hd,
            )
            layer_caches.append(cache)
            states.append(h_new)
            layer_in = h_new
        o_in = np.concatenate([states[-1], ctx])
        logits = o_in @ p["out_w"] + p["out_b"]
        logp = _log_softmax(logits)
        loss_sum += -logp[out_ids[j]]
        steps.append((y_in, out_ids[j], s_top_prev, u, alpha, layer_caches, o_in, np.exp(logp)))
    cache = (enc, enc_mean, enc_proj, init_states, steps, n_steps)
    return loss_sum / n_steps, cache


def _decoder_backward(model: TranslationModel, cache, grads) -> np.ndarray:
    """Backward through the decoder; returns d(encoder states)."""
    cfg = model.config
    p = model.params
    enc, enc_mean, enc_proj, init_states, steps, n_steps = cache
    pooled_len = enc.shape[0]
    hd = cfg.decoder_hidden
    n_layers = cfg.decoder_layers
    d = cfg.embed_dim
    scale = 1.0 / n_steps

    d_enc = np.zeros_like(enc)
    d_enc_proj = np.zeros_like(enc_proj)
    ds_carry = [np.zeros(hd) for _ in range(n_layers)]
    collectors = [_GruGradCollector() for _ in range(n_layers)]
    o_in_rows = []
    d_logit_rows = []
    y_in_ids = []
    d_yemb_rows = []
    s_top_prev_rows = []
    du_sum_rows = []
    att_ws = p["att_ws"]
    att_v = p["att_v"]
    out_w = p["out_w"]
    for step in reversed(steps):
        y_in, y_out, s_top_prev, u, alpha, layer_caches, o_in, probs = step
        d_logits = probs * scale
        d_logits[y_out] -= scale
        o_in_rows.append(o_in)
        d_logit_rows.append(d_logits)
        d_o_in = out_w @ d_logits
        d_ctx = d_o_in[hd:].copy()

        d_from_above = d_o_in[:hd]
        new_carry: list = [None] * n_layers
        for layer in range(n_layers, 0, -1):
            dh_total = d_from_above + ds_carry[layer - 1]
            dx, dh_prev, dgx, dgh = _gru_step_backward(
                dh_total, layer_caches[layer - 1], p[f"dec{layer}_wx"], p[f"dec{layer}_wh"], hd
            )
            collectors[layer - 1].add(layer_caches[layer - 1], dgx, dgh)
            new_carry[layer - 1] = dh_prev
            d_from_above = dx
        # d_from_above is now the gradient w.r.t. [y embedding; context]
        y_in_ids.append(y_in)
        d_yemb_rows.append(d_from_above[:d])
        d_ctx += d_from_above[d:]

        d_alpha = enc @ d_ctx
        d_enc += alpha[:, None] * d_ctx
        d_scores = alpha * (d_alpha - alpha @ d_alpha)
        du_pre = (d_scores[:, None] * att_v) * (1.0 - u * u)
        grads["att_v"] += u.T @ d_scores
        du_sum = du_pre.sum(axis=0)
        s_top_prev_rows.append(s_top_prev)
        du_sum_rows.append(du_sum)
        d_enc_proj += du_pre
        new_carry[-1] = new_carry[-1] + att_ws @ du_sum
        ds_carry = new_carry

    d_logit_stack = np.stack(d_logit_rows)
    grads["out_w"] += np.stack(o_in_rows).T @ d_logit_stack
    grads["out_b"] += d_logit_stack.sum(axis=0)
    grads["att_ws"] += np.stack(s_top_prev_rows).T @ np.stack(du_sum_rows)
    np.add.at(grads["tgt_embed"], y_in_ids, np.stack(d_yemb_rows))
    for layer in range(1, n_layers + 1):
        collectors[layer - 1].flush(grads, f"dec{layer}")

    d_enc_mean = np.zeros_like(enc_mean)
    for layer in range(1, n_layers + 1):
        s0 = init_states[layer - 1]
        d_pre = ds_carry[layer - 1] * (1.0 - s0 * s0)
        grads[f"dec{layer}_init_w"] += np.outer(enc_mean, d_pre)
        grads[f"dec{layer}_init_b"] += d_pre
        d_enc_mean += p[f"dec{layer}_init_w"] @ d_pre
    d_enc += d_enc_mean / pooled_len
    grads["att_ue"] += enc.T @ d_enc_proj
    d_enc += d_enc_proj @ p["att_ue"].T
    return d_enc


def _source_ids(model: TranslationModel, source: str) -> list[int]:
    lowered = source.lower()
    if not lowered:
        raise EmptySource("cannot encode an empty source string")
    return model.source_vocab.encode(lowered)


def _target_ids(model: TranslationModel, target: str) -> tuple[list[int], list[int]]:
    ids = model.target_vocab.encode(target.lower())
    return [BOS] + ids, ids + [EOS]


def encode(model: TranslationModel, source: str) -> EncoderStates:
    """Run the encoder; the state count is ceil(len(source) / pool_interval)."""
    states, _ = _encode_ids(model, _source_ids(model, source))
    return EncoderStates(states=states, count=states.shape[0])


def attention(
    model: TranslationModel, decoder_state: np.ndarray, enc: EncoderStates
) -> tuple[np.ndarray, np.ndarray]:
    """Additive attention; returns (context vector, weights over states)."""
    p = model.params
    u = np.tanh(enc.states @ p["att_ue"] + decoder_state @ p["att_ws"])
    weights = _softmax(u @ p["att_v"])
    return weights @ enc.states, weights


def sequence_loss(model: TranslationModel, source: str, target: str) -> float:
    """Mean per-character cross-entropy of the target under teacher forcing."""
    if not target:
        raise ValueError("empty target")
    enc, _ = _encode_ids(model, _source_ids(model, source))
    in_ids, out_ids = _target_ids(model, target)
    loss, _ = _decoder_forward(model, enc, in_ids, out_ids)
    return float(loss)


def multi_target_loss(model: TranslationModel, example: TrainingExample) -> float:
    """Minimum sequence loss over the example's admissible targets."""
    enc, _ = _encode_ids(model, _source_ids(model, example.source))
    best = None
    for target in example.targets:
        in_ids, out_ids = _target_ids(model, target)
        loss, _ = _decoder_forward(model, enc, in_ids, out_ids)
        if best is None or loss < best:
            best = loss
    return float(best)


def loss_and_gradients(
    model: TranslationModel, example: TrainingExample
) -> tuple[float, dict[str, np.ndarray]]:
    """Multi-target loss and its gradients.

    Gradient flows only through the target with the least loss (ties go to
    the first such target).
    """
    enc, enc_cache = _encode_ids(model, _source_ids(model, example.source))
    best_loss = None
    best_cache = None
    for target in example.targets:
        in_ids, out_ids = _target_ids(model, target)
        loss, cache = _decoder_forward(model, enc, in_ids, out_ids)
        if best_loss is None or loss < best_loss:
            best_loss = loss
            best_cache = cache
    grads = zero_gradients(model)
    d_enc = _decoder_backward(model, best_cache, grads)
    _encode_backward(model, enc_cache, d_enc, grads)
    return float(best_loss), grads


def decode_greedy(model: TranslationModel, source: str) -> str:
    """Greedy argmax decoding until EOS or the length cap.

    PAD/BOS/UNK are excluded from the argmax, so the output contains only
    real target characters.  The cap is
    ``max_decode_factor * len(source) + max_decode_slack``.
    """
    cfg = model.config
    p = model.params
    lowered = source.lower()
    if not lowered:
        raise EmptySource("cannot decode from an empty source string")
    enc, _ = _encode_ids(model, model.source_vocab.encode(lowered))
    hd = cfg.decoder_hidden
    n_layers = cfg.decoder_layers
    enc_mean = enc.mean(axis=0)
    enc_proj = enc @ p["att_ue"]
    states = [
        np.tanh(enc_mean @ p[f"dec{layer}_init_w"] + p[f"dec{layer}_init_b"])
        for layer in range(1, n_layers + 1)
    ]
    cap = cfg.max_decode_factor * len(lowered) + cfg.max_decode_slack
    out_chars: list[str] = []
    prev = BOS
    while len(out_chars) < cap:
        u = np.tanh(enc_proj + states[-1] @ p["att_ws"])
        alpha = _softmax(u @ p["att_v"])
        ctx = alpha @ enc
        x = np.concatenate([p["tgt_embed"][prev], ctx])
        new_states = []
        layer_in = x
        for layer in range(1, n_layers + 1):
            h_new, _ = _gru_step(
                layer_in,
                states[layer - 1],
                p[f"dec{layer}_wx"],
                p[f"dec{layer}_wh"],
                p[f"dec{layer}_b"],
                hd,
            )
            new_states.append(h_new)
            layer_in = h_new
        states = new_states
        logits = np.concatenate([states[-1], ctx]) @ p["out_w"] + p["out_b"]
        logits[[PAD, BOS, UNK]] = -np.inf
        nxt = int(np.argmax(logits))
        if nxt == EOS:
            break
        out_chars.append(model.target_vocab.decode_id(nxt))
        prev = nxt
    return "".join(out_chars)
