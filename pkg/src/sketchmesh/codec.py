"""Mesh <-> token sequence codec.

A mesh serialises to a flat token stream: ``Start``, then one or more
chains separated by ``Split``, then ``End``. A chain is a vertex strip:
its first three vertices form a triangle and every later vertex closes a
triangle with the two before it, so n vertices encode n - 2 triangles.
Each vertex is exactly three coordinate tokens, x then y then z.

Encoding walks triangles in canonical (z, y, x) lexicographic order and
greedily extends a strip across the shared edge of the last two emitted
vertices, always picking the earliest unvisited candidate; when the
strip dies it restarts at the first unvisited triangle. Decoding just
replays the chains, so a round trip reproduces the triangle set exactly.

In-memory tokens are plain ints: coordinates are >= 0, the three control
tokens are the negative constants below. The on-wire id mapping lives in
``token_to_wire`` / ``wire_to_token``.
"""

from __future__ import annotations

import json
import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .errors import SequenceValidationError
from .mesh import (
    DEFAULT_BINS,
    QuantizedMesh,
    Triangle,
    Vertex,
    mesh_from_triangles,
    vertex_key,
)

START = -1
END = -2
SPLIT = -3

_CONTROL_NAMES = {START: "<start>", END: "<end>", SPLIT: "<split>"}
_NAME_CONTROLS = {name: tok for tok, name in _CONTROL_NAMES.items()}


def is_coord(token: int) -> bool:
    return token >= 0


def token_to_wire(token: int, bins: int) -> int:
    """Map to the contiguous id space [0, bins + 3)."""
    if token >= 0:
        if token >= bins:
            # would alias a control token's wire id
            raise ValueError(f"coordinate {token} outside [0, {bins - 1}]")
        return token
    if token == START:
        return bins
    if token == END:
        return bins + 1
    if token == SPLIT:
        return bins + 2
    raise ValueError(f"unknown token {token}")


def wire_to_token(wire: int, bins: int) -> int:
    if 0 <= wire < bins:
        return wire
    if wire == bins:
        return START
    if wire == bins + 1:
        return END
    if wire == bins + 2:
        return SPLIT
    raise ValueError(f"wire id {wire} outside vocabulary of {bins + 3}")


def vocab_size(bins: int) -> int:
    return bins + 3


@dataclass(frozen=True)
class TokenSequence:
    """A validated full sequence: Start ... End."""

    tokens: tuple[int, ...]
    bins: int = DEFAULT_BINS

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


@dataclass(frozen=True)
class Violation:
    index: int
    message: str


def validate(seq: TokenSequence) -> list[Violation]:
    """Check structural invariants; empty list means valid.

    Checks: starts with Start, ends with End, each appears exactly once,
    coordinates within [0, bins), every chain's coordinate count is a
    positive multiple of 3 with at least 9 coordinates (one triangle).
    ``[Start, End]`` is the valid empty mesh.
    """
    toks = seq.tokens
    out: list[Violation] = []
    if not toks:
        return [Violation(0, "sequence is empty")]
    if toks[0] != START:
        out.append(Violation(0, "sequence must begin with <start>"))
    last = len(toks) - 1
    if toks[last] != END:
        out.append(Violation(last, "sequence must end with <end>"))
    for i, t in enumerate(toks):
        if t == START and i != 0:
            out.append(Violation(i, "<start> only allowed at position 0"))
        elif t == END and i != last:
            out.append(Violation(i, "<end> only allowed at the final position"))
        elif is_coord(t) and t >= seq.bins:
            out.append(Violation(i, f"coordinate {t} outside [0, {seq.bins - 1}]"))
        elif t < SPLIT:
            out.append(Violation(i, f"unknown token {t}"))

    # Chain structure between the controls. Only meaningful if the frame
    # is intact; a missing Start/End already produced a violation above.
    if toks[0] == START and toks[last] == END:
        body = toks[1:last]
        if body:
            run_start = 1  # index into toks
            runs: list[tuple[int, int]] = []  # (start index, coord count)
            count = 0
            for i, t in enumerate(toks[1:last], start=1):
                if t == SPLIT:
                    runs.append((run_start, count))
                    run_start = i + 1
                    count = 0
                elif is_coord(t):
                    count += 1
            runs.append((run_start, count))
            for start, count in runs:
                anchor = start if count else min(start, last)
                if count == 0:
                    out.append(Violation(anchor, "empty chain"))
                elif count % 3 != 0:
                    out.append(
                        Violation(start, f"chain has {count} coordinates, not a multiple of 3")
                    )
                elif count < 9:
                    out.append(
                        Violation(start, f"chain has {count // 3} vertices, need at least 3")
                    )
    out.sort(key=lambda v: v.index)
    return out


def check(seq: TokenSequence) -> None:
    """Raise SequenceValidationError if invalid."""
    violations = validate(seq)
    if violations:
        raise SequenceValidationError([(v.index, v.message) for v in violations])


def _edge(a: Vertex, b: Vertex) -> tuple[Vertex, Vertex]:
    return (a, b) if vertex_key(a) <= vertex_key(b) else (b, a)


def chains(mesh: QuantizedMesh) -> list[list[Vertex]]:
    """Decompose the mesh into the vertex strips the codec emits."""
    order = mesh.ordered()
    rank = {t: i for i, t in enumerate(order)}
    edge_map: dict[tuple[Vertex, Vertex], list[Triangle]] = {}
    for t in order:
        a, b, c = t
        for e in (_edge(a, b), _edge(b, c), _edge(a, c)):
            edge_map.setdefault(e, []).append(t)

    visited: set[Triangle] = set()
    out: list[list[Vertex]] = []
    for seed in order:
        if seed in visited:
            continue
        visited.add(seed)
        chain = [seed[0], seed[1], seed[2]]
        while True:
            e = _edge(chain[-2], chain[-1])
            nxt: Optional[Triangle] = None
            for cand in edge_map.get(e, ()):
                if cand not in visited and (nxt is None or rank[cand] < rank[nxt]):
                    nxt = cand
            if nxt is None:
                break
            visited.add(nxt)
            third = next(v for v in nxt if v != chain[-2] and v != chain[-1])
            chain.append(third)
        out.append(chain)
    return out


def tokenize(mesh: QuantizedMesh) -> TokenSequence:
    toks: list[int] = [START]
    for i, chain in enumerate(chains(mesh)):
        if i:
            toks.append(SPLIT)
        for v in chain:
            toks.extend(v)
    toks.append(END)
    return TokenSequence(tuple(toks), mesh.bins)


def detokenize(
    seq: TokenSequence, counters: Optional[Counter] = None
) -> QuantizedMesh:
    """Rebuild the triangle set. Raises on an invalid sequence.

    ``counters`` receives ``degenerate_dropped`` / ``duplicates_merged``
    for chains that encode such triangles (a decoder may emit them).
    """
    check(seq)

    def triangles() -> Iterable[Triangle]:
        coords: list[int] = []
        verts: list[Vertex] = []
        for t in seq.tokens[1:]:
            if is_coord(t):
                coords.append(t)
                if len(coords) == 3:
                    verts.append((coords[0], coords[1], coords[2]))
                    coords.clear()
                    if len(verts) >= 3:
                        yield (verts[-3], verts[-2], verts[-1])
            else:  # SPLIT or the final END
                verts.clear()

    return mesh_from_triangles(triangles(), seq.bins, counters)


def prompt_tokens(seq: TokenSequence) -> tuple[int, ...]:
    """The sequence with its End removed, the decode-time context prefix."""
    if seq.tokens and seq.tokens[-1] == END:
        return seq.tokens[:-1]
    return seq.tokens


def fragment_sequence(
    fragment: Sequence[int], bins: int = DEFAULT_BINS
) -> TokenSequence:
    """Wrap a generated continuation (ending in End) into a full sequence.

    A continuation decoded after a non-empty prompt legitimately begins
    with the Split separating it from the prompt's chains; standing
    alone that separator is meaningless, so one leading Split is
    dropped before wrapping.
    """
    toks = tuple(fragment)
    if toks and toks[0] == SPLIT:
        toks = toks[1:]
    return TokenSequence((START, *toks), bins)


def splice(prompt: TokenSequence, fragment: Sequence[int]) -> TokenSequence:
    """Append a continuation to a prompt sequence: edit composition.

    The prompt's End is dropped, a Split is inserted if the prompt has
    chains, and the fragment (which must end with End) follows.
    """
    head = list(prompt_tokens(prompt))
    if len(head) > 1 and fragment and fragment[0] != SPLIT and is_coord(fragment[0]):
        head.append(SPLIT)
    return TokenSequence(tuple(head) + tuple(fragment), prompt.bins)


def token_counts(seq: TokenSequence) -> dict[str, int]:
    """Control/coordinate/vertex tallies for a full sequence."""
    coords = sum(1 for t in seq.tokens if is_coord(t))
    controls = len(seq.tokens) - coords
    return {
        "tokens": len(seq.tokens),
        "control": controls,
        "coordinates": coords,
        "vertices": coords // 3,
        "chains": 1 + sum(1 for t in seq.tokens if t == SPLIT) if coords else 0,
    }


def compression_stats(mesh: QuantizedMesh) -> dict[str, float]:
    """Strip encoding length next to the 9-coords-per-triangle baseline."""
    seq = tokenize(mesh)
    n = len(seq)
    naive = 2 + 9 * mesh.face_count
    return {
        "tokens": n,
        "naive_tokens": naive,
        "ratio": n / naive if naive else 1.0,
    }


# --- serialisation -------------------------------------------------------

_MAGIC = b"MTOK"
_VERSION = 1


def write_tokens(seq: TokenSequence, path: Union[str, Path]) -> None:
    """Binary container: magic, u16 version, u16 bins, u16 wire ids (LE)."""
    check(seq)
    payload = struct.pack(
        f"<{len(seq.tokens)}H",
        *(token_to_wire(t, seq.bins) for t in seq.tokens),
    )
    header = _MAGIC + struct.pack("<HH", _VERSION, seq.bins)
    Path(path).write_bytes(header + payload)


def read_tokens(path: Union[str, Path]) -> TokenSequence:
    blob = Path(path).read_bytes()
    if len(blob) < 8 or blob[:4] != _MAGIC:
        raise ValueError("not a token file (bad magic)")
    version, bins = struct.unpack("<HH", blob[4:8])
    if version != _VERSION:
        raise ValueError(f"unsupported token file version {version}")
    body = blob[8:]
    if len(body) % 2:
        raise ValueError("truncated token payload")
    wires = struct.unpack(f"<{len(body) // 2}H", body)
    seq = TokenSequence(tuple(wire_to_token(w, bins) for w in wires), bins)
    check(seq)
    return seq


def to_json(seq: TokenSequence) -> str:
    """Debug form with control names spelled out."""
    items = [
        _CONTROL_NAMES.get(t, t) for t in seq.tokens
    ]
    return json.dumps({"bins": seq.bins, "tokens": items})


def from_json(text: str) -> TokenSequence:
    doc = json.loads(text)
    toks = tuple(
        _NAME_CONTROLS[t] if isinstance(t, str) else int(t) for t in doc["tokens"]
    )
    return TokenSequence(toks, int(doc["bins"]))
