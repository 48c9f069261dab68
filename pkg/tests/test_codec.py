import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sketchmesh.codec import (
    END,
    SPLIT,
    START,
    TokenSequence,
    chains,
    check,
    compression_stats,
    detokenize,
    fragment_sequence,
    from_json,
    prompt_tokens,
    read_tokens,
    splice,
    to_json,
    token_counts,
    token_to_wire,
    tokenize,
    validate,
    vocab_size,
    wire_to_token,
    write_tokens,
)
from sketchmesh.errors import SequenceValidationError
from sketchmesh.mesh import mesh_from_triangles, vertex_key
from sketchmesh.synthetic import random_mesh, strip_mesh


# --- fixtures frozen before the codec existed ---------------------------

def test_strip_is_one_chain_of_32_tokens(strip8):
    seq = tokenize(strip8)
    assert len(seq.tokens) == 32
    counts = token_counts(seq)
    assert counts["chains"] == 1
    assert counts["vertices"] == 10
    # naive encoding spends 9 coordinates per triangle plus the frame
    assert 2 + 9 * strip8.face_count == 74


def test_token_count_law(rng):
    for _ in range(30):
        mesh = random_mesh(rng, int(rng.integers(1, 120)))
        seq = tokenize(mesh)
        parts = chains(mesh)
        expect = 2 + (len(parts) - 1) + 3 * sum(len(c) for c in parts)
        assert len(seq.tokens) == expect


def test_empty_mesh_is_start_end():
    empty = mesh_from_triangles([], 128)
    assert tokenize(empty).tokens == (START, END)
    assert detokenize(tokenize(empty)) == empty


# --- chain construction -------------------------------------------------

def test_chains_cover_mesh_exactly(small_mesh):
    parts = chains(small_mesh)
    tris = []
    for part in parts:
        assert len(part) >= 3
        tris.extend(
            (part[i], part[i + 1], part[i + 2]) for i in range(len(part) - 2)
        )
    rebuilt = mesh_from_triangles(tris, small_mesh.bins)
    assert rebuilt == small_mesh
    assert len(tris) == small_mesh.face_count  # no window wasted


def test_chains_start_canonically(small_mesh):
    first = chains(small_mesh)[0]
    lead = min(small_mesh.ordered()[0], key=vertex_key)
    assert vertex_key(first[0]) == vertex_key(lead)


def test_consecutive_windows_share_an_edge(small_mesh):
    for part in chains(small_mesh):
        for i in range(len(part) - 3):
            w1 = {part[i], part[i + 1], part[i + 2]}
            w2 = {part[i + 1], part[i + 2], part[i + 3]}
            assert len(w1 & w2) == 2


# --- round trips ---------------------------------------------------------

def test_round_trip_random_meshes(rng):
    for _ in range(50):
        mesh = random_mesh(rng, int(rng.integers(1, 200)))
        assert detokenize(tokenize(mesh)) == mesh


@st.composite
def triangle_sets(draw):
    coords = st.integers(min_value=0, max_value=15)
    vertex = st.tuples(coords, coords, coords)
    tri = st.tuples(vertex, vertex, vertex)
    return draw(st.lists(tri, min_size=0, max_size=40))


@given(triangle_sets())
@settings(max_examples=60, deadline=None)
def test_round_trip_property(tris):
    mesh = mesh_from_triangles(tris, bins=16)
    seq = tokenize(mesh)
    assert not validate(seq)
    assert detokenize(seq) == mesh


@given(triangle_sets())
@settings(max_examples=40, deadline=None)
def test_tokenization_is_deterministic(tris):
    mesh = mesh_from_triangles(tris, bins=16)
    assert tokenize(mesh).tokens == tokenize(mesh).tokens


# --- validation ----------------------------------------------------------

def seq_of(*toks, bins=128):
    return TokenSequence(tuple(toks), bins)


def test_validate_clean_sequence(strip8):
    assert validate(tokenize(strip8)) == []


def test_validate_framing():
    assert validate(seq_of(END, START))
    assert validate(seq_of(START))
    v = validate(seq_of(START, 1, 2, 3, 4, 5, 6, 7, 8, 9))
    assert any("end" in viol.message for viol in v)


def test_validate_short_chain():
    v = validate(seq_of(START, 1, 2, 3, 4, 5, 6, END))
    assert any("at least 3" in viol.message for viol in v)


def test_validate_ragged_run():
    v = validate(seq_of(START, 1, 2, 3, 4, END))
    assert any("multiple of 3" in viol.message for viol in v)


def test_validate_empty_chain():
    toks = (START, *range(1, 10), SPLIT, END)
    v = validate(seq_of(*toks))
    assert any("empty chain" in viol.message for viol in v)


def test_validate_coordinate_range():
    toks = (START, 1, 2, 3, 4, 5, 6, 7, 8, 200, END)
    v = validate(seq_of(*toks))
    assert any("outside" in viol.message for viol in v)


def test_validate_misplaced_controls():
    v = validate(seq_of(START, 1, START, 3, 4, 5, 6, 7, 8, 9, END))
    assert any("position 0" in viol.message for viol in v)


def test_check_raises_with_positions():
    with pytest.raises(SequenceValidationError) as err:
        check(seq_of(START, 1, 2, END))
    assert err.value.violations
    index, message = err.value.violations[0]
    assert isinstance(index, int) and message


def test_detokenize_rejects_invalid():
    with pytest.raises(SequenceValidationError):
        detokenize(seq_of(START, 5, END))


def test_detokenize_counts_degenerate_windows():
    # a strip that stalls on one vertex yields degenerate windows
    from collections import Counter

    a, b, c, d = (0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)
    e = (0, 2, 0)
    toks = [START]
    for v in (a, b, c, c, d, e):
        toks.extend(v)
    toks.append(END)
    counters = Counter()
    mesh = detokenize(seq_of(*toks), counters)
    # windows: abc ok, bcc and ccd degenerate, cde ok
    assert counters["degenerate_dropped"] == 2
    assert mesh.face_count == 2


# --- wire encoding and containers ----------------------------------------

def test_wire_round_trip_all_tokens():
    bins = 128
    for t in [*range(bins), START, END, SPLIT]:
        assert wire_to_token(token_to_wire(t, bins), bins) == t
    assert vocab_size(bins) == bins + 3


def test_wire_rejects_out_of_range():
    with pytest.raises(ValueError):
        token_to_wire(128, 128)
    with pytest.raises(ValueError):
        wire_to_token(131, 128)


def test_token_file_round_trip(tmp_path, small_mesh):
    seq = tokenize(small_mesh)
    path = tmp_path / "mesh.mtok"
    write_tokens(seq, path)
    again = read_tokens(path)
    assert again.tokens == seq.tokens
    assert again.bins == seq.bins


def test_token_file_magic_checked(tmp_path):
    path = tmp_path / "bad.mtok"
    path.write_bytes(b"NOPE" + bytes(8))
    with pytest.raises(ValueError):
        read_tokens(path)


def test_json_round_trip(small_mesh):
    seq = tokenize(small_mesh)
    again = from_json(to_json(seq))
    assert again == seq


# --- prompts, fragments, splicing ----------------------------------------

def test_prompt_drops_end(strip8):
    seq = tokenize(strip8)
    assert prompt_tokens(seq) == seq.tokens[:-1]


def test_splice_fragment_round_trip(rng):
    """Cutting a sequence and splicing the pieces back is identity."""
    for _ in range(20):
        mesh = random_mesh(rng, 60)
        seq = tokenize(mesh)
        cuts = [i for i, t in enumerate(seq.tokens) if t == SPLIT]
        if not cuts:
            continue
        cut = int(rng.choice(cuts))
        prompt = TokenSequence(seq.tokens[:cut] + (END,), seq.bins)
        fragment = seq.tokens[cut:]  # leading Split, trailing End
        assert splice(prompt, fragment) == seq


def test_splice_inserts_missing_split(strip8):
    seq = tokenize(strip8)
    frag = (5, 6, 7, 8, 9, 10, 11, 12, 13, END)
    spliced = splice(seq, frag)
    assert spliced.tokens[len(seq.tokens) - 1] == SPLIT


def test_fragment_sequence_strips_one_seam_split():
    frag = (SPLIT, *range(1, 10), END)
    seq = fragment_sequence(frag, 128)
    assert seq.tokens == (START, *range(1, 10), END)
    assert not validate(seq)


def test_compression_stats_strip(strip8):
    stats = compression_stats(strip8)
    assert stats["tokens"] == 32
    assert stats["naive_tokens"] == 74
    assert stats["ratio"] == pytest.approx(32 / 74)
