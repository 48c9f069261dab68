import numpy as np
import pytest

from sketchmesh.codec import (
    END,
    SPLIT,
    START,
    TokenSequence,
    splice,
    tokenize,
    vocab_size,
)
from sketchmesh.generate import (
    CountingModel,
    DecodeConfig,
    DelayedModel,
    bench_decode,
    continuation_pairs,
    corpus_pairs,
    fit_counting_model,
    fit_counting_speculator,
    generate_addition,
    load_tables,
    oracle_pair,
    save_tables,
    validate_fragment,
)
from sketchmesh.synthetic import random_mesh, strip_mesh, toy_corpus


def fitted(meshes, order=6):
    pairs = corpus_pairs([tokenize(m) for m in meshes])
    return (
        fit_counting_model(pairs, order=order),
        fit_counting_speculator(pairs, order=order),
        pairs,
    )


# --- counting model -------------------------------------------------------

def test_distributions_sum_to_one(strip8):
    model, _, pairs = fitted([strip8])
    dist, _ = model.step((START,), (), None)
    assert dist.shape == (vocab_size(model.bins),)
    assert dist.sum() == pytest.approx(1.0)
    # an unseen context backs off rather than going flat zero
    dist, _ = model.step((START,), (1, 2, 3, 4, 5, 6), None)
    assert dist.sum() == pytest.approx(1.0)


def test_model_never_emits_start(strip8):
    model, _, _ = fitted([strip8])
    for ctx in [(), (0,), (0, 0, 1)]:
        dist, _ = model.step((START,), ctx, None)
        assert dist[model.bins] == 0.0


def test_single_sequence_replays_exactly(strip8):
    """A one-mesh corpus is pure memorisation for greedy decoding."""
    model, spec, pairs = fitted([strip8])
    prompt, target = pairs[0]
    frag, trace = generate_addition(model, prompt)
    assert frag == target.tokens[1:]
    frag_spec, _ = generate_addition(
        model, prompt, speculator=spec, config=DecodeConfig(speculate=True)
    )
    assert frag_spec == frag


def test_fit_rejects_empty_and_bad_order():
    with pytest.raises(ValueError):
        fit_counting_model([])
    with pytest.raises(ValueError):
        fit_counting_model(
            corpus_pairs([tokenize(strip_mesh(4))]), order=0
        )


def test_speculator_heads_are_coordinate_only(strip8):
    model, spec, pairs = fitted([strip8])
    prompt, target = pairs[0]
    # teacher-force the first vertex of the target
    x = target.tokens[1]
    _, hidden = model.step(prompt.tokens[:-1], (), None)
    dist_y, dist_z = spec.speculate(hidden, x)
    assert dist_y.shape == (model.bins,)
    assert dist_z.shape == (model.bins,)
    assert int(np.argmax(dist_y)) == target.tokens[2]
    assert int(np.argmax(dist_z)) == target.tokens[3]


def test_higher_order_contexts_memorise_better(rng):
    meshes = [random_mesh(rng, 30) for _ in range(4)]
    pairs = corpus_pairs([tokenize(m) for m in meshes])
    shallow = fit_counting_model(pairs, order=1)
    deep = fit_counting_model(pairs, order=6)
    assert shallow.order == 1 and deep.order == 6


# --- oracle decode and pass accounting ------------------------------------

def test_oracle_decode_on_off_identical(rng):
    for _ in range(5):
        mesh = random_mesh(rng, 40)
        seq = tokenize(mesh)
        model, spec = oracle_pair(seq)
        prompt = TokenSequence((START, END), seq.bins)
        plain, t_plain = generate_addition(model, prompt)
        fast, t_fast = generate_addition(
            model, prompt, speculator=spec, config=DecodeConfig(speculate=True)
        )
        assert plain == fast == seq.tokens[1:]
        assert not t_plain.truncated


def test_pass_count_law(rng):
    """Speculation pays one pass per vertex; plain pays three."""
    for _ in range(5):
        mesh = random_mesh(rng, 30)
        seq = tokenize(mesh)
        model, spec = oracle_pair(seq)
        prompt = TokenSequence((START, END), seq.bins)
        _, t_plain = generate_addition(model, prompt)
        _, t_fast = generate_addition(
            model, prompt, speculator=spec, config=DecodeConfig(speculate=True)
        )
        n_control = t_plain.control_tokens
        n_vertex = t_plain.vertices
        assert t_plain.model_passes == n_control + 3 * n_vertex
        assert t_fast.model_passes == n_control + n_vertex
        assert t_fast.speculator_calls == n_vertex


def test_verify_mode_spends_the_saved_passes(rng):
    mesh = random_mesh(rng, 20)
    seq = tokenize(mesh)
    model, spec = oracle_pair(seq)
    prompt = TokenSequence((START, END), seq.bins)
    _, trace = generate_addition(
        model,
        prompt,
        speculator=spec,
        config=DecodeConfig(speculate=True, verify_speculator=True),
    )
    assert trace.model_passes == trace.control_tokens + 3 * trace.vertices
    assert trace.tokens == seq.tokens[1:]


def test_truncation_stops_at_vertex_boundary(rng):
    mesh = random_mesh(rng, 60)
    seq = tokenize(mesh)
    model, spec = oracle_pair(seq)
    prompt = TokenSequence((START, END), seq.bins)
    for speculate in (False, True):
        frag, trace = generate_addition(
            model,
            prompt,
            speculator=spec,
            config=DecodeConfig(max_tokens=20, speculate=speculate),
        )
        assert trace.truncated
        coords = sum(1 for t in frag if t >= 0)
        assert coords % 3 == 0


def test_speculate_requires_speculator(strip8):
    model, _, pairs = fitted([strip8])
    with pytest.raises(ValueError):
        generate_addition(
            model, pairs[0][0], config=DecodeConfig(speculate=True)
        )


def test_sampled_decode_is_seed_deterministic(strip8):
    model, spec, pairs = fitted([strip8])
    cfg = DecodeConfig(temperature=0.7, top_k=8, seed=41, speculate=True)
    a, _ = generate_addition(model, pairs[0][0], speculator=spec, config=cfg)
    b, _ = generate_addition(model, pairs[0][0], speculator=spec, config=cfg)
    assert a == b


# --- pairing protocols ----------------------------------------------------

def test_corpus_pairs_use_empty_prompt(strip8):
    pairs = corpus_pairs([tokenize(strip8)])
    prompt, target = pairs[0]
    assert prompt.tokens == (START, END)
    assert target == tokenize(strip8)


def test_continuation_pairs_recombine(rng):
    meshes = [m for m in toy_corpus(rng, 9)]
    seqs = [tokenize(m) for m in meshes]
    pairs = continuation_pairs(seqs, rng)
    assert len(pairs) == len(seqs)
    for (prompt, target), seq in zip(pairs, seqs):
        if prompt.tokens == (START, END):
            assert target == seq
            continue
        frag = (SPLIT,) + target.tokens[1:]
        assert splice(prompt, frag) == seq


def test_continuation_pairs_single_chain_falls_back(rng):
    seq = tokenize(strip_mesh(8))
    pairs = continuation_pairs([seq], rng)
    assert pairs[0][0].tokens == (START, END)


def test_counting_corpus_decodes_validate(rng):
    meshes = toy_corpus(rng, 12)
    seqs = [tokenize(m) for m in meshes]
    pairs = continuation_pairs(seqs, rng)
    model = fit_counting_model(pairs, order=6)
    spec = fit_counting_speculator(pairs, order=6)
    good = 0
    for prompt, _ in pairs:
        frag, _ = generate_addition(
            model, prompt, speculator=spec, config=DecodeConfig(speculate=True)
        )
        good += validate_fragment(frag, model.bins)
    assert good >= len(pairs) - 1


# --- benchmark and persistence -------------------------------------------

def test_bench_report_schema(strip8):
    seq = tokenize(strip8)
    model, spec = oracle_pair(seq)
    report = bench_decode(
        model, spec, [TokenSequence((START, END), seq.bins)], max_tokens=60
    )
    assert set(report) == {
        "tokens_per_second_on",
        "tokens_per_second_off",
        "ratio",
        "passes_on",
        "passes_off",
    }
    assert report["passes_off"] > report["passes_on"]


def test_delay_makes_speculation_pay(rng):
    mesh = random_mesh(rng, 60)
    seq = tokenize(mesh)
    model, spec = oracle_pair(seq)
    report = bench_decode(
        model,
        spec,
        [TokenSequence((START, END), seq.bins)],
        delay_ms=1.0,
        max_tokens=90,
    )
    assert report["ratio"] > 1.2


def test_delayed_model_preserves_outputs(strip8):
    model, _, pairs = fitted([strip8])
    slow = DelayedModel(model, 0.0)
    a, _ = generate_addition(model, pairs[0][0])
    b, _ = generate_addition(slow, pairs[0][0])
    assert a == b


def test_tables_round_trip(tmp_path, rng):
    meshes = toy_corpus(rng, 6)
    pairs = continuation_pairs([tokenize(m) for m in meshes], rng)
    model = fit_counting_model(pairs, order=4)
    spec = fit_counting_speculator(pairs, order=4)
    path = tmp_path / "tables.bin"
    save_tables(path, model, spec)
    model2, spec2 = load_tables(path)
    assert model2.bins == model.bins and model2.order == model.order
    for prompt, _ in pairs:
        a, _ = generate_addition(model, prompt, speculator=spec, config=DecodeConfig(speculate=True))
        b, _ = generate_addition(model2, prompt, speculator=spec2, config=DecodeConfig(speculate=True))
        assert a == b


def test_tables_without_speculator(tmp_path, strip8):
    model, _, _ = fitted([strip8])
    path = tmp_path / "m.bin"
    save_tables(path, model)
    model2, spec2 = load_tables(path)
    assert spec2 is None
    assert isinstance(model2, CountingModel)
