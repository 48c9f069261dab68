"""Autoregressive mesh generation with vertex-aligned fast decoding.

Every vertex is exactly three tokens, so once a model has predicted a
vertex's x coordinate, a small side head (the speculator) can propose y
and z from the model's hidden state without two further full passes.
Decoding then costs one model pass per vertex plus one per control
token instead of one per token. Speculator outputs are accepted as-is
by default; an optional verify mode re-derives y and z with the model
and keeps its answer on disagreement.

Models here are deliberately tiny reference implementations: an order-k
counting model (add-one smoothing, suffix backoff for unseen contexts)
and a teacher-forcing oracle that replays a known target. They exist to
make the decode loop, its pass-count accounting, and the benchmark
harness testable without any learned weights.

Distributions are numpy arrays over the wire vocabulary (coordinates
then start/end/split); speculator heads are over coordinates only.
"""

from __future__ import annotations

import json
import time
import zlib
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Protocol, Sequence, Union

import numpy as np

from .codec import (
    END,
    SPLIT,
    START,
    TokenSequence,
    fragment_sequence,
    is_coord,
    prompt_tokens,
    token_to_wire,
    validate,
    wire_to_token,
)
from .mesh import DEFAULT_BINS


class SequenceModel(Protocol):
    def step(
        self,
        prefix: Sequence[int],
        generated: Sequence[int],
        condition: Any = None,
    ) -> tuple[np.ndarray, Any]:
        """Distribution over the next wire id, plus opaque hidden state."""
        ...


class Speculator(Protocol):
    def speculate(self, hidden: Any, x: int) -> tuple[np.ndarray, np.ndarray]:
        """(dist_y, dist_z) over coordinate values, given the hidden state
        of the step that produced x and the sampled x itself."""
        ...


@dataclass(frozen=True)
class DecodeConfig:
    max_tokens: int = 7000
    temperature: float = 0.0  # 0 = greedy
    top_k: int = 0
    speculate: bool = False
    verify_speculator: bool = False
    seed: int = 0


@dataclass
class DecodeTrace:
    tokens: tuple[int, ...]
    model_passes: int
    speculator_calls: int
    wall_time: float
    truncated: bool

    @property
    def control_tokens(self) -> int:
        return sum(1 for t in self.tokens if not is_coord(t))

    @property
    def vertices(self) -> int:
        return sum(1 for t in self.tokens if is_coord(t)) // 3


def _renorm(dist: np.ndarray) -> np.ndarray:
    s = dist.sum()
    if s <= 0:
        return np.full(dist.shape, 1.0 / dist.shape[0])
    return dist / s


def _draw(dist: np.ndarray, rng: np.random.Generator, config: DecodeConfig) -> int:
    if config.temperature <= 0:
        return int(np.argmax(dist))
    with np.errstate(divide="ignore"):
        p = np.where(dist > 0, dist ** (1.0 / config.temperature), 0.0)
    if config.top_k > 0 and config.top_k < p.shape[0]:
        order = np.argsort(-p, kind="stable")
        p[order[config.top_k :]] = 0.0
    p = _renorm(p)
    return int(rng.choice(p.shape[0], p=p))


def generate_addition(
    model: SequenceModel,
    prompt: TokenSequence,
    *,
    speculator: Optional[Speculator] = None,
    condition: Any = None,
    config: DecodeConfig = DecodeConfig(),
) -> tuple[tuple[int, ...], DecodeTrace]:
    """Generate the continuation of ``prompt`` (its End removed).

    Returns the generated fragment (ideally ending with End; a Start is
    never part of it) and a trace with exact pass counts. Hitting
    ``max_tokens`` stops cleanly and sets ``truncated``; the fragment is
    returned unfinished rather than raising.
    """
    if config.speculate and speculator is None:
        raise ValueError("speculative decoding requires a speculator")
    bins = prompt.bins
    start_id = bins
    prefix = prompt_tokens(prompt)
    rng = np.random.default_rng(config.seed)
    generated: list[int] = []
    passes = 0
    spec_calls = 0
    pending = 0  # coordinates of the unfinished vertex (plain mode only)
    truncated = False
    t0 = time.perf_counter()
    while True:
        if pending == 0 and len(generated) >= config.max_tokens:
            truncated = True
            break
        dist, hidden = model.step(prefix, generated, condition)
        passes += 1
        dist = np.asarray(dist, dtype=np.float64).copy()
        dist[start_id] = 0.0
        if pending:
            dist[bins:] = 0.0  # mid-vertex: coordinates only
        if dist.sum() <= 0:  # degenerate model output: uniform over allowed
            dist[: bins if pending else dist.shape[0]] = 1.0
            dist[start_id] = 0.0
        wire = _draw(dist / dist.sum(), rng, config)
        token = wire_to_token(wire, bins)
        if is_coord(token):
            if pending:
                generated.append(token)
                pending = (pending + 1) % 3
            elif config.speculate:
                spec_calls += 1
                dist_y, dist_z = speculator.speculate(hidden, token)
                y = _draw(_renorm(np.asarray(dist_y, dtype=np.float64)), rng, config)
                z = _draw(_renorm(np.asarray(dist_z, dtype=np.float64)), rng, config)
                if config.verify_speculator:
                    y, z, extra = _verify(
                        model, prefix, generated, token, y, z, condition, config, rng, bins
                    )
                    passes += extra
                generated.extend((token, y, z))
            else:
                generated.append(token)
                pending = 1
        else:
            generated.append(token)
            if token == END:
                break
    wall = time.perf_counter() - t0
    trace = DecodeTrace(
        tokens=tuple(generated),
        model_passes=passes,
        speculator_calls=spec_calls,
        wall_time=wall,
        truncated=truncated,
    )
    return trace.tokens, trace


def _verify(model, prefix, generated, x, y, z, condition, config, rng, bins):
    """Recompute y and z with full model passes; model wins disagreements."""
    trial = list(generated) + [x]
    dist, _ = model.step(prefix, trial, condition)
    dist = np.asarray(dist, dtype=np.float64).copy()
    dist[bins:] = 0.0
    y_model = _draw(_renorm(dist), rng, config)
    trial.append(y_model)
    dist, _ = model.step(prefix, trial, condition)
    dist = np.asarray(dist, dtype=np.float64).copy()
    dist[bins:] = 0.0
    z_model = _draw(_renorm(dist), rng, config)
    return y_model, z_model, 2


def validate_fragment(fragment: Sequence[int], bins: int) -> bool:
    """True if the fragment wraps into a structurally valid sequence."""
    return not validate(fragment_sequence(fragment, bins))


# --- counting reference model -------------------------------------------


def _wire_stream(seq: TokenSequence) -> list[int]:
    return [token_to_wire(t, seq.bins) for t in seq.tokens]


@dataclass
class CountingModel:
    """Order-k context counts over wire ids, add-one smoothed.

    Unknown contexts back off to their longest known suffix; the empty
    context always exists after fitting, so a distribution is always
    defined. The emitted distribution covers coordinates, Split, and
    End; Start carries exactly zero mass (a continuation can never
    contain it). The hidden state handed to a speculator is the context
    tuple itself.
    """

    bins: int
    order: int
    tables: dict[tuple[int, ...], Counter] = field(default_factory=dict)

    @property
    def vocab(self) -> int:
        return self.bins + 3

    def _lookup(self, context: tuple[int, ...]) -> Counter:
        for k in range(min(self.order, len(context)), -1, -1):
            key = context[len(context) - k :]
            if key in self.tables:
                return self.tables[key]
        return Counter()

    def step(self, prefix, generated, condition=None):
        # Only the last `order` tokens matter; never materialise the stream.
        tail = list(generated[-self.order :]) if self.order else []
        if len(tail) < self.order:
            take = self.order - len(tail)
            tail = list(prefix[-take:]) + tail
        context = tuple(token_to_wire(t, self.bins) for t in tail)
        counts = self._lookup(context)
        total = sum(counts.values())
        dist = np.ones(self.vocab, dtype=np.float64)
        dist[self.bins] = 0.0  # Start is not in the emission vocabulary
        for wire, n in counts.items():
            dist[wire] += n
        dist /= total + self.vocab - 1
        return dist, context


@dataclass
class CountingSpeculator:
    """Coordinate heads: y counts keyed by (context, x), z by (context, x, y).

    The z head conditions on its own greedy y, so one call yields both
    heads; under greedy decoding that y is the one the loop picks anyway.
    """

    bins: int
    order: int
    y_tables: dict[tuple[int, ...], Counter] = field(default_factory=dict)
    z_tables: dict[tuple[int, ...], Counter] = field(default_factory=dict)

    def _lookup(self, tables, context: tuple[int, ...], tail: tuple[int, ...]):
        for k in range(min(self.order, len(context)), -1, -1):
            key = context[len(context) - k :] + tail
            if key in tables:
                return tables[key]
        return Counter()

    def _head(self, counts: Counter) -> np.ndarray:
        dist = np.ones(self.bins, dtype=np.float64)
        for wire, n in counts.items():
            if wire < self.bins:
                dist[wire] += n
        return dist / dist.sum()

    def speculate(self, hidden, x: int):
        context = tuple(hidden)
        dist_y = self._head(self._lookup(self.y_tables, context, (x,)))
        y_greedy = int(np.argmax(dist_y))
        dist_z = self._head(
            self._lookup(self.z_tables, context, (x, y_greedy))
        )
        return dist_y, dist_z


TrainingPair = tuple[TokenSequence, TokenSequence]

EMPTY_PROMPT_TOKENS = (START, END)


def corpus_pairs(sequences: Sequence[TokenSequence]) -> list[TrainingPair]:
    """Whole meshes as from-scratch pairs: empty prompt, full target."""
    return [
        (TokenSequence(EMPTY_PROMPT_TOKENS, seq.bins), seq) for seq in sequences
    ]


def continuation_pairs(
    sequences: Sequence[TokenSequence],
    rng: np.random.Generator,
) -> list[TrainingPair]:
    """One pair per sequence, cut at a chain boundary.

    The prompt keeps the chains before the cut, the target holds the
    rest, and the severed separator becomes the seam a decoder must
    re-emit. Cutting between chains rather than between arbitrary
    triangles keeps the seam context unambiguous: a chain break only
    ever appears in the corpus where a chain actually ended. A
    single-chain sequence has no interior boundary and falls back to
    the from-scratch pair.
    """
    out: list[TrainingPair] = []
    for seq in sequences:
        cuts = [i for i, t in enumerate(seq.tokens) if t == SPLIT]
        if not cuts:
            out.append((TokenSequence(EMPTY_PROMPT_TOKENS, seq.bins), seq))
            continue
        cut = int(rng.choice(cuts))
        prompt = TokenSequence(seq.tokens[:cut] + (END,), seq.bins)
        target = TokenSequence((START,) + seq.tokens[cut + 1 :], seq.bins)
        out.append((prompt, target))
    return out


def _pair_stream(prompt: TokenSequence, target: TokenSequence) -> tuple[list[int], int]:
    """Wire-id stream prompt-minus-End + target-minus-Start, and the index
    where supervised (target) positions begin.

    When the prompt already holds chains and the target adds more, the
    first supervised token is the Split that separates them, exactly as
    a decoder would have to emit it.
    """
    head = [token_to_wire(t, prompt.bins) for t in prompt_tokens(prompt)]
    tail = [token_to_wire(t, target.bins) for t in target.tokens[1:]]
    if len(head) > 1 and any(w < target.bins for w in tail):
        tail = [token_to_wire(SPLIT, target.bins)] + tail
    return head + tail, len(head)


def fit_counting_model(
    pairs: Sequence[TrainingPair],
    order: int = 6,
    bins: int = DEFAULT_BINS,
) -> CountingModel:
    """Count next-token contexts over the target portion of each pair."""
    if not pairs:
        raise ValueError("cannot fit on an empty corpus")
    if order < 1:
        raise ValueError("order must be at least 1")
    model = CountingModel(bins=bins, order=order)
    model.tables.setdefault((), Counter())
    for prompt, target in pairs:
        wires, first = _pair_stream(prompt, target)
        for i in range(first, len(wires)):
            for k in range(0, min(order, i) + 1):
                ctx = tuple(wires[i - k : i])
                model.tables.setdefault(ctx, Counter())[wires[i]] += 1
    return model


def fit_counting_speculator(
    pairs: Sequence[TrainingPair],
    order: int = 6,
    bins: int = DEFAULT_BINS,
) -> CountingSpeculator:
    if not pairs:
        raise ValueError("cannot fit on an empty corpus")
    spec = CountingSpeculator(bins=bins, order=order)
    for prompt, target in pairs:
        wires, first = _pair_stream(prompt, target)
        run = 0  # coordinates since the last control token
        for i, w in enumerate(wires):
            if w >= bins:
                run = 0
                continue
            if i >= first and run % 3 == 0:  # vertex start: x, y, z follow
                x, y, z = wires[i], wires[i + 1], wires[i + 2]
                for k in range(0, min(order, i) + 1):
                    ctx = tuple(wires[i - k : i])
                    spec.y_tables.setdefault(ctx + (x,), Counter())[y] += 1
                    spec.z_tables.setdefault(ctx + (x, y), Counter())[z] += 1
            run += 1
    return spec


# --- teacher-forcing oracle ---------------------------------------------


class OracleModel:
    """Replays a known target sequence with probability one per step."""

    def __init__(self, target: TokenSequence):
        self.bins = target.bins
        self.fragment = target.tokens[1:]  # drop Start

    def step(self, prefix, generated, condition=None):
        i = len(generated)
        token = self.fragment[i] if i < len(self.fragment) else END
        dist = np.zeros(self.bins + 3, dtype=np.float64)
        dist[token_to_wire(token, self.bins)] = 1.0
        return dist, i


class OracleSpeculator:
    """Reads y and z straight out of the same target."""

    def __init__(self, target: TokenSequence):
        self.bins = target.bins
        self.fragment = target.tokens[1:]

    def speculate(self, hidden, x: int):
        i = int(hidden)
        y = self.fragment[i + 1]
        z = self.fragment[i + 2]
        dist_y = np.zeros(self.bins, dtype=np.float64)
        dist_z = np.zeros(self.bins, dtype=np.float64)
        dist_y[y] = 1.0
        dist_z[z] = 1.0
        return dist_y, dist_z


def oracle_pair(target: TokenSequence) -> tuple[OracleModel, OracleSpeculator]:
    return OracleModel(target), OracleSpeculator(target)


# --- benchmark -----------------------------------------------------------


class DelayedModel:
    """Adds a fixed sleep per step, standing in for real network latency.

    The speculator head is not delayed: it is the cheap path whose whole
    point is avoiding a full pass.
    """

    def __init__(self, inner: SequenceModel, delay_s: float):
        self.inner = inner
        self.delay_s = delay_s

    def step(self, prefix, generated, condition=None):
        if self.delay_s > 0:
            time.sleep(self.delay_s)
        return self.inner.step(prefix, generated, condition)


def bench_decode(
    model: SequenceModel,
    speculator: Speculator,
    prompts: Sequence[TokenSequence],
    *,
    delay_ms: float = 0.0,
    max_tokens: int = 300,
    condition: Any = None,
    config: DecodeConfig = DecodeConfig(),
) -> dict:
    """Time greedy decoding with the speculator on vs off.

    Each prompt is decoded twice with the same settings except the
    speculate flag; rates aggregate tokens over wall time per arm.
    """
    delayed = DelayedModel(model, delay_ms / 1000.0)
    totals = {True: [0, 0.0, 0], False: [0, 0.0, 0]}  # tokens, time, passes
    for prompt in prompts:
        for on in (False, True):
            run_cfg = DecodeConfig(
                max_tokens=max_tokens,
                temperature=config.temperature,
                top_k=config.top_k,
                speculate=on,
                verify_speculator=config.verify_speculator,
                seed=config.seed,
            )
            _, trace = generate_addition(
                delayed,
                prompt,
                speculator=speculator,
                condition=condition,
                config=run_cfg,
            )
            totals[on][0] += len(trace.tokens)
            totals[on][1] += trace.wall_time
            totals[on][2] += trace.model_passes
    on_tokens, on_time, on_passes = totals[True]
    off_tokens, off_time, off_passes = totals[False]
    tps_on = on_tokens / on_time if on_time > 0 else float("inf")
    tps_off = off_tokens / off_time if off_time > 0 else float("inf")
    return {
        "tokens_per_second_on": tps_on,
        "tokens_per_second_off": tps_off,
        "ratio": tps_on / tps_off if tps_off > 0 else float("inf"),
        "passes_on": on_passes,
        "passes_off": off_passes,
    }


# --- persistence ---------------------------------------------------------


def _pack_tables(tables: dict[tuple[int, ...], Counter]) -> dict:
    return {
        ",".join(map(str, key)): dict(sorted(counts.items()))
        for key, counts in sorted(tables.items())
    }


def _unpack_tables(doc: dict) -> dict[tuple[int, ...], Counter]:
    out: dict[tuple[int, ...], Counter] = {}
    for key, counts in doc.items():
        ctx = tuple(int(p) for p in key.split(",")) if key else ()
        out[ctx] = Counter({int(w): int(n) for w, n in counts.items()})
    return out


def save_tables(
    path: Union[str, Path],
    model: CountingModel,
    speculator: Optional[CountingSpeculator] = None,
) -> None:
    """Zlib-compressed JSON container for fitted count tables."""
    doc = {
        "bins": model.bins,
        "order": model.order,
        "model": _pack_tables(model.tables),
    }
    if speculator is not None:
        doc["speculator_y"] = _pack_tables(speculator.y_tables)
        doc["speculator_z"] = _pack_tables(speculator.z_tables)
    blob = zlib.compress(json.dumps(doc, sort_keys=True).encode("utf-8"), 6)
    Path(path).write_bytes(blob)


def load_tables(
    path: Union[str, Path],
) -> tuple[CountingModel, Optional[CountingSpeculator]]:
    doc = json.loads(zlib.decompress(Path(path).read_bytes()).decode("utf-8"))
    model = CountingModel(
        bins=int(doc["bins"]),
        order=int(doc["order"]),
        tables=_unpack_tables(doc["model"]),
    )
    speculator = None
    if "speculator_y" in doc:
        speculator = CountingSpeculator(
            bins=model.bins,
            order=model.order,
            y_tables=_unpack_tables(doc["speculator_y"]),
            z_tables=_unpack_tables(doc["speculator_z"]),
        )
    return model, speculator
