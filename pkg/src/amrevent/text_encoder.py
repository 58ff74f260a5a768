"""Contextual token encoder with span markers.

A small trained-from-scratch Transformer stands in for a large
pre-trained language model: the rest of the system only relies on the
interface (tokens in, per-token vectors out, span vectors read at the
opening marker), so any drop-in contextual encoder satisfies it.

Spans of interest are wrapped in reserved marker tokens [E1]..[E16] /
[/E1]..[/E16]; the hidden vector at the opening marker is the span's
representation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .autodiff import Tensor, l2_normalize, scatter_sum, softmax, stack, where
from .errors import ConfigError, SpanUnavailableError, ValidationError

_OPEN_RE = re.compile(r"^\[E(\d+)\]$")
_CLOSE_RE = re.compile(r"^\[/E(\d+)\]$")

BOS, EOS, PAD, UNK = "<s>", "</s>", "<pad>", "<unk>"


class Vocabulary:
    """Dense token -> id map with reserved control and marker tokens."""

    def __init__(self, id_to_token: list[str]):
        self.id_to_token = list(id_to_token)
        self.token_to_id = {t: i for i, t in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValidationError("vocabulary contains duplicate tokens")
        for required in (BOS, EOS, PAD, UNK):
            if required not in self.token_to_id:
                raise ValidationError(f"vocabulary is missing reserved token {required}")

    def __len__(self):
        return len(self.id_to_token)

    def id(self, token: str) -> int:
        return self.token_to_id.get(token, self.token_to_id[UNK])

    @property
    def pad_id(self) -> int:
        return self.token_to_id[PAD]

    @staticmethod
    def marker_open(k: int) -> str:
        return f"[E{k}]"

    @staticmethod
    def marker_close(k: int) -> str:
        return f"[/E{k}]"

    @classmethod
    def build(cls, corpus_tokens, marker_pairs: int = 16) -> "Vocabulary":
        """Reserved tokens, then marker pairs, then the sorted corpus
        vocabulary."""
        reserved = [BOS, EOS, PAD, UNK]
        for k in range(1, marker_pairs + 1):
            reserved.append(cls.marker_open(k))
            reserved.append(cls.marker_close(k))
        seen = set(reserved)
        rest = sorted({t for t in corpus_tokens if t not in seen})
        return cls(reserved + rest)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for tok in self.id_to_token:
                fh.write(tok + "\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, "r", encoding="utf-8") as fh:
            return cls([line.rstrip("\n") for line in fh if line != "\n" and line != ""])


@dataclass
class EncoderConfig:
    layers: int = 2
    dim: int = 64
    heads: int = 4
    ff_dim: Optional[int] = None
    max_len: int = 128
    marker_pairs: int = 16
    residual: bool = True
    # learned relative-position attention bias, clipped at this many
    # positions (0 disables); lets marker rows find their span without
    # memorizing absolute positions
    rel_window: int = 8
    # dropout applied to attention and feed-forward outputs while a
    # dropout rng is supplied (training); memorized co-adaptations are
    # useless under it, which pushes span content into marker rows
    dropout: float = 0.1

    def __post_init__(self):
        if self.ff_dim is None:
            self.ff_dim = 4 * self.dim
        if self.dim % self.heads != 0:
            raise ConfigError("dim must be divisible by heads")


class EncoderParams:
    """All trainable tensors of the encoder, addressable by name.

    feature_center is a fitted (not trained) corpus statistic: the
    mean span vector over a training corpus. Transformer span vectors
    share a large static component that saturates cosine similarity;
    downstream consumers subtract this offset to work with the
    informative deviations. Zero until fitted.
    """

    def __init__(self, config: EncoderConfig, vocab: Vocabulary, tensors: dict[str, Tensor]):
        self.config = config
        self.vocab = vocab
        self.tensors = tensors
        self.feature_center = np.zeros(config.dim, dtype=np.float32)

    @classmethod
    def init(cls, config: EncoderConfig, vocab: Vocabulary, rng: np.random.Generator,
             dtype=np.float32, scale: float = 0.02) -> "EncoderParams":
        d, ff = config.dim, config.ff_dim
        t: dict[str, Tensor] = {}

        def normal(shape):
            return Tensor((rng.standard_normal(shape) * scale).astype(dtype), requires_grad=True)

        def const(shape, value):
            return Tensor(np.full(shape, value, dtype=dtype), requires_grad=True)

        t["tok_embed"] = normal((len(vocab), d))
        t["pos_embed"] = normal((config.max_len, d))
        for k in range(config.layers):
            t[f"layer{k}.attn.wq"] = normal((d, d))
            t[f"layer{k}.attn.wk"] = normal((d, d))
            t[f"layer{k}.attn.wv"] = normal((d, d))
            t[f"layer{k}.attn.wo"] = normal((d, d))
            if config.rel_window > 0:
                t[f"layer{k}.attn.rel_bias"] = const(
                    (config.heads, 2 * config.rel_window + 1), 0.0
                )
            t[f"layer{k}.ln1.g"] = const((d,), 1.0)
            t[f"layer{k}.ln1.b"] = const((d,), 0.0)
            t[f"layer{k}.ln2.g"] = const((d,), 1.0)
            t[f"layer{k}.ln2.b"] = const((d,), 0.0)
            t[f"layer{k}.ff.w1"] = normal((d, ff))
            t[f"layer{k}.ff.b1"] = const((ff,), 0.0)
            t[f"layer{k}.ff.w2"] = normal((ff, d))
            t[f"layer{k}.ff.b2"] = const((d,), 0.0)
        t["ln_f.g"] = const((d,), 1.0)
        t["ln_f.b"] = const((d,), 0.0)
        return cls(config, vocab, t)

    @classmethod
    def zeros(cls, config: EncoderConfig, vocab: Vocabulary, dtype=np.float32) -> "EncoderParams":
        rng = np.random.default_rng(0)
        p = cls.init(config, vocab, rng, dtype=dtype)
        for t in p.tensors.values():
            t.data = np.zeros_like(t.data)
        return p

    def named_tensors(self) -> dict[str, Tensor]:
        return dict(self.tensors)

    def copy_arrays(self) -> dict[str, np.ndarray]:
        return {k: t.data.copy() for k, t in self.tensors.items()}

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for k, t in self.tensors.items():
            t.data = arrays[k].copy()


@dataclass
class EncodedSentence:
    """Output of one encoder pass.

    marker_positions maps the marker number k (as written in [Ek]) to
    (open, close) positions in the encoded sequence; lost_spans lists
    marker numbers whose pairs were dropped by truncation.
    """

    tokens: list[str]
    token_ids: np.ndarray
    outputs: Tensor
    marker_positions: dict[int, tuple[int, int]]
    lost_spans: set[int] = field(default_factory=set)


def insert_markers(
    tokens: list[str], spans: list[tuple[int, int]], max_pairs: int = 16
) -> tuple[list[str], list[tuple[int, int]]]:
    """Wrap each span in a fresh [Ei]/[/Ei] pair.

    Marker numbers follow span start order, so the i-th span from the
    left always gets [Ei] regardless of the order spans were passed
    in. Returns the marked tokens and, aligned with the input order,
    each span's (open, close) marker positions.
    """
    n = len(tokens)
    if len(spans) > max_pairs:
        raise ValidationError(f"{len(spans)} spans exceed the {max_pairs} reserved marker pairs")
    for s, e in spans:
        if not (0 <= s < e <= n):
            raise ValidationError(f"span [{s},{e}) out of range for {n} tokens")
    order = sorted(range(len(spans)), key=lambda i: (spans[i][0], spans[i][1]))
    prev_end = 0
    for i in order:
        s, e = spans[i]
        if s < prev_end:
            raise ValidationError("overlapping spans")
        prev_end = e

    marked: list[str] = []
    positions: list[tuple[int, int]] = [(-1, -1)] * len(spans)
    cursor = 0
    for rank, i in enumerate(order, start=1):
        s, e = spans[i]
        marked.extend(tokens[cursor:s])
        open_pos = len(marked)
        marked.append(Vocabulary.marker_open(rank))
        marked.extend(tokens[s:e])
        close_pos = len(marked)
        marked.append(Vocabulary.marker_close(rank))
        positions[i] = (open_pos, close_pos)
        cursor = e
    marked.extend(tokens[cursor:])
    return marked, positions


def _scan_markers(tokens: list[str]) -> dict[int, tuple[int, int]]:
    opens: dict[int, int] = {}
    pairs: dict[int, tuple[int, int]] = {}
    for pos, tok in enumerate(tokens):
        m = _OPEN_RE.match(tok)
        if m:
            k = int(m.group(1))
            if k in opens or k in pairs:
                raise ValidationError(f"marker [E{k}] appears twice")
            opens[k] = pos
            continue
        m = _CLOSE_RE.match(tok)
        if m:
            k = int(m.group(1))
            if k not in opens:
                raise ValidationError(f"[/E{k}] without matching [E{k}]")
            pairs[k] = (opens.pop(k), pos)
    if opens:
        k = next(iter(opens))
        raise ValidationError(f"[E{k}] without matching [/E{k}]")
    return pairs


def _truncate(tokens: list[str], max_len: int) -> tuple[list[str], dict[int, tuple[int, int]], set[int]]:
    """Right truncation that never splits a marker pair: a pair whose
    close marker falls beyond the cut is removed whole and reported
    as lost."""
    tokens = list(tokens)
    lost: set[int] = set()
    while len(tokens) > max_len:
        pairs = _scan_markers(tokens)
        split = [k for k, (o, c) in pairs.items() if o < max_len <= c]
        if not split:
            for k, (o, c) in pairs.items():
                if o >= max_len:
                    lost.add(k)
            tokens = tokens[:max_len]
            break
        # drop the rightmost straddling pair and rescan
        k = max(split, key=lambda k: pairs[k][1])
        o, c = pairs[k]
        del tokens[c]
        del tokens[o]
        lost.add(k)
    return tokens, _scan_markers(tokens), lost


def _layer_norm(x: Tensor, g: Tensor, b: Tensor, eps: float = 1e-5) -> Tensor:
    mu = x.mean(axis=-1, keepdims=True)
    centered = x - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    return centered / (var + eps).sqrt() * g + b


def encode(params: EncoderParams, tokens: list[str], max_len: Optional[int] = None,
           dropout_rng: Optional[np.random.Generator] = None) -> EncodedSentence:
    """Deterministic forward pass over a (possibly marker-bearing)
    token sequence. Trailing <pad> tokens are excluded from attention,
    so appending padding never changes the other rows. Passing
    `dropout_rng` enables training-mode dropout."""
    cfg = params.config

    def drop(x):
        if dropout_rng is None or cfg.dropout <= 0.0:
            return x
        keep = (dropout_rng.random(x.shape) >= cfg.dropout).astype(x.data.dtype)
        return x * Tensor(keep / (1.0 - cfg.dropout))

    cap = cfg.max_len if max_len is None else min(max_len, cfg.max_len)
    tokens, marker_positions, lost = _truncate(list(tokens), cap)

    vocab = params.vocab
    ids = np.array([vocab.id(t) for t in tokens], dtype=np.intp)
    n = len(ids)
    t = params.tensors

    h = t["tok_embed"][ids] + t["pos_embed"][np.arange(n)]
    attend = ids != vocab.pad_id  # keys a query may look at
    key_mask = np.broadcast_to(attend, (n, n))

    d, heads = cfg.dim, cfg.heads
    dh = d // heads
    inv_sqrt = 1.0 / float(np.sqrt(dh))
    if cfg.rel_window > 0:
        pos = np.arange(n)
        delta = np.clip(pos[None, :] - pos[:, None], -cfg.rel_window, cfg.rel_window)
        delta = delta + cfg.rel_window  # (n, n) bias-table columns
        head_idx = np.broadcast_to(np.arange(heads)[:, None, None], (heads, n, n))
        delta_idx = np.broadcast_to(delta, (heads, n, n))
    for k in range(cfg.layers):
        x = _layer_norm(h, t[f"layer{k}.ln1.g"], t[f"layer{k}.ln1.b"])
        q = (x @ t[f"layer{k}.attn.wq"]).reshape(n, heads, dh).swapaxes(0, 1)
        kk = (x @ t[f"layer{k}.attn.wk"]).reshape(n, heads, dh).swapaxes(0, 1)
        v = (x @ t[f"layer{k}.attn.wv"]).reshape(n, heads, dh).swapaxes(0, 1)
        scores = (q @ kk.swapaxes(-1, -2)) * inv_sqrt
        if cfg.rel_window > 0:
            scores = scores + t[f"layer{k}.attn.rel_bias"][head_idx, delta_idx]
        scores = where(key_mask, scores, -np.inf)
        ctx = softmax(scores, axis=-1) @ v
        attn_out = drop(ctx.swapaxes(0, 1).reshape(n, d) @ t[f"layer{k}.attn.wo"])
        h = h + attn_out if cfg.residual else attn_out

        x = _layer_norm(h, t[f"layer{k}.ln2.g"], t[f"layer{k}.ln2.b"])
        ff = (x @ t[f"layer{k}.ff.w1"] + t[f"layer{k}.ff.b1"]).relu() @ t[f"layer{k}.ff.w2"] + t[f"layer{k}.ff.b2"]
        ff = drop(ff)
        h = h + ff if cfg.residual else ff

    h = _layer_norm(h, t["ln_f.g"], t["ln_f.b"])

    # span-content anchor: each open marker's row additionally carries
    # the mean input embedding of the tokens it brackets. A from-scratch
    # contextual row alone is not mention-invariant enough to give
    # span vectors stable cross-sentence geometry; the embedding-table
    # anchor is, and context still enters through the attention path.
    if marker_positions:
        rows = []
        scale = float(np.sqrt(d))  # match the norm of a layer-normed row
        for _k, (o, c) in sorted(marker_positions.items()):
            if c > o + 1:
                anchor = l2_normalize(t["tok_embed"][ids[o + 1 : c]].mean(axis=0)) * scale
                rows.append((o, anchor))
        if rows:
            add = stack([anchor for _o, anchor in rows])
            h = h + scatter_sum(add, np.array([o for o, _a in rows], dtype=np.intp), len(ids))
    return EncodedSentence(tokens, ids, h, marker_positions, lost)


def span_representation(enc: EncodedSentence, span_index: int) -> Tensor:
    """The output row at span's opening marker. span_index is the
    marker number k of [Ek]."""
    if span_index in enc.lost_spans:
        raise SpanUnavailableError(f"span {span_index} was lost to truncation")
    if span_index not in enc.marker_positions:
        raise SpanUnavailableError(f"no marker pair {span_index} in this sentence")
    open_pos, _ = enc.marker_positions[span_index]
    return enc.outputs[open_pos]


def concept_embedding(params: EncoderParams, concept: str) -> Tensor:
    """Embedding-table vector for a bare concept token (used for
    nodes without a token alignment)."""
    return params.tensors["tok_embed"][params.vocab.id(concept)]


def node_vectors(
    params: EncoderParams,
    tokens: list[str],
    spans: dict,
    concepts: dict,
    max_len: Optional[int] = None,
    dropout_rng: Optional[np.random.Generator] = None,
) -> dict:
    """Span vectors for many nodes of one sentence.

    Nodes with token spans are grouped into marker batches (spans in a
    batch must not overlap; at most `marker_pairs` per batch), each
    batch is encoded once, and the opening-marker rows are collected.
    Nodes without spans, and spans lost to truncation, fall back to
    the concept embedding.
    """
    cfg = params.config
    out: dict = {}
    spanned = [(key, span) for key, span in spans.items() if span is not None]
    spanned.sort(key=lambda item: (item[1][0], item[1][1], str(item[0])))

    groups: list[list[tuple]] = []
    for key, span in spanned:
        placed = False
        for grp in groups:
            if len(grp) >= cfg.marker_pairs:
                continue
            if all(span[1] <= s or e <= span[0] for _, (s, e) in grp):
                grp.append((key, span))
                placed = True
                break
        if not placed:
            groups.append([(key, span)])

    for grp in groups:
        grp.sort(key=lambda item: item[1][0])
        marked, _ = insert_markers(tokens, [span for _, span in grp], max_pairs=cfg.marker_pairs)
        enc = encode(params, marked, max_len=max_len, dropout_rng=dropout_rng)
        for rank, (key, _span) in enumerate(grp, start=1):
            try:
                out[key] = span_representation(enc, rank)
            except SpanUnavailableError:
                out[key] = concept_embedding(params, concepts[key])

    for key, span in spans.items():
        if span is None:
            out[key] = concept_embedding(params, concepts[key])
    return out
