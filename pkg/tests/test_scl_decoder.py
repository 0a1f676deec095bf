import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from channel import AwgnConfig, awgn_transmit
from codespec import CodeSpec, CrcSpec
from encoder import build_message, encode
from oracle import brute_ml
from sc_decoder import DecoderOptions, HardDecision, decode_frames, sc_decode
from scl_decoder import (ListConfig, ListDecision, path_metric_update, prune_frames, scl_decode,
                         scl_decode_batch, split_and_prune)

CRC_SPEC = CodeSpec(m=4, k=6, frozen=frozenset({1, 2, 3, 4, 5, 9}),
                    swap_sets={4: {6}}, add_sets={3: {2}, 4: {10}}, crc=CrcSpec(0x3, 4))


def _noisy(spec, rng, frames, ebno_db):
    payload = rng.integers(0, 2, (frames, spec.k), dtype=np.uint8)
    sent = encode(spec, build_message(spec, payload))
    return payload, sent, awgn_transmit(sent, AwgnConfig.for_spec(spec, ebno_db, int(rng.integers(2 ** 31))))


def test_metric_update_examples():
    assert path_metric_update(0.0, -2.0, 1) == 0.0
    assert path_metric_update(0.0, -2.0, 0) == 2.0
    assert path_metric_update(1.5, 3.0, 1) == 4.5
    assert path_metric_update(1.5, 0.0, 0) == path_metric_update(1.5, 0.0, 1) == 1.5


def test_list_size_must_be_positive():
    with pytest.raises(ValueError):
        ListConfig(list_size=0)


def test_list_of_one_is_sc(fig2_spec, add_spec_16, rng):
    for spec in (fig2_spec, add_spec_16):
        llrs = rng.normal(1.0, 2.0, (300, spec.n))
        result = scl_decode_batch(spec, llrs, ListConfig(1))
        sc = decode_frames(spec, llrs, HardDecision())
        np.testing.assert_array_equal(result.messages, sc.message)
        np.testing.assert_array_equal(result.codewords, sc.B(0))
        np.testing.assert_array_equal(result.metrics, sc.metric)


def test_full_list_is_maximum_likelihood(fig2_spec, rng):
    _, _, llrs = _noisy(fig2_spec, rng, 300, 0.0)
    result = scl_decode_batch(fig2_spec, llrs, ListConfig(1 << fig2_spec.k), DecoderOptions(debug=True))
    for f in range(llrs.shape[0]):
        _, codeword = brute_ml(fig2_spec, llrs[f])
        np.testing.assert_array_equal(result.codewords[f], codeword)


def test_full_list_is_maximum_likelihood_at_length_16(case3_spec, rng):
    _, _, llrs = _noisy(case3_spec, rng, 100, 1.0)
    for start in range(0, 100, 25):
        batch = llrs[start:start + 25]
        result = scl_decode_batch(case3_spec, batch, ListConfig(1 << case3_spec.k))
        for f in range(batch.shape[0]):
            np.testing.assert_array_equal(result.codewords[f], brute_ml(case3_spec, batch[f])[1])


def test_full_list_metric_is_a_lower_bound(add_spec_16, rng):
    _, _, llrs = _noisy(add_spec_16, rng, 50, 1.0)
    best = scl_decode_batch(add_spec_16, llrs, ListConfig(1 << add_spec_16.k)).metrics
    for list_size in (1, 2, 4, 16):
        metrics = scl_decode_batch(add_spec_16, llrs, ListConfig(list_size)).metrics
        assert np.all(best <= metrics + 1e-9)


def test_noiseless_frames_with_lists(add_spec_16, rng):
    payload = rng.integers(0, 2, (20, add_spec_16.k), dtype=np.uint8)
    u = build_message(add_spec_16, payload)
    llrs = 1.0 - 2.0 * encode(add_spec_16, u)
    for list_size in (2, 8):
        result = scl_decode_batch(add_spec_16, llrs, ListConfig(list_size), DecoderOptions(debug=True))
        np.testing.assert_array_equal(result.messages, u)
        assert np.all(result.metrics == 0.0)


def test_ranked_list_is_sorted_by_metric(case3_spec, rng):
    _, _, llrs = _noisy(case3_spec, rng, 10, 0.0)
    for frame in llrs:
        paths = scl_decode(case3_spec, frame, ListConfig(8))
        assert len(paths) == 8
        metrics = [p.metric for p in paths]
        assert metrics == sorted(metrics)
        assert all(p.crc_ok for p in paths)
        assert paths[0].metric == scl_decode_batch(case3_spec, frame[None, :], ListConfig(8)).metrics[0]


def test_list_never_exceeds_the_number_of_messages(fig2_spec, rng):
    paths = scl_decode(fig2_spec, rng.normal(1.0, 1.0, 8), ListConfig(64))
    assert len(paths) == 1 << fig2_spec.k
    assert len({tuple(p.message) for p in paths}) == len(paths)


def test_crc_aided_ranking(rng):
    _, sent, llrs = _noisy(CRC_SPEC, rng, 60, -1.0)
    cfg = ListConfig.for_spec(CRC_SPEC, 8)
    for frame in llrs:
        paths = scl_decode(CRC_SPEC, frame, cfg)
        passing = [p for p in paths if p.crc_ok]
        if passing:
            assert paths[0].crc_ok
            assert paths[0].metric == min(p.metric for p in passing)
        else:
            assert paths[0].metric == min(p.metric for p in paths)
        rest = [p.metric for p in paths[1:]]
        assert rest == sorted(rest)


def test_crc_aided_decoding_recovers_noiseless_payloads(rng):
    payload = rng.integers(0, 2, (10, CRC_SPEC.k), dtype=np.uint8)
    u = build_message(CRC_SPEC, payload)
    llrs = 1.0 - 2.0 * encode(CRC_SPEC, u)
    result = scl_decode_batch(CRC_SPEC, llrs, ListConfig.for_spec(CRC_SPEC, 4))
    np.testing.assert_array_equal(result.messages, u)
    assert result.crc_ok.all()


def test_batch_frames_are_decoded_independently(case3_spec, rng):
    _, _, llrs = _noisy(case3_spec, rng, 6, 0.5)
    result = scl_decode_batch(case3_spec, llrs, ListConfig(4), DecoderOptions(debug=True))
    for f, frame in enumerate(llrs):
        alone = scl_decode(case3_spec, frame, ListConfig(4))[0]
        np.testing.assert_array_equal(result.messages[f], alone.message)
        assert result.metrics[f] == alone.metric


def test_path_metrics_never_decrease(add_spec_16, rng):
    llrs = rng.normal(1.0, 2.0, add_spec_16.n)
    state = decode_frames(add_spec_16, llrs, ListDecision(8, 1), DecoderOptions(debug=True))
    assert state.paths == 8
    assert np.all(state.leaf_metric >= 0)
    assert np.all(np.diff(state.leaf_metric, axis=1) >= 0)
    np.testing.assert_array_equal(state.leaf_metric[:, -1], state.metric)


def test_split_and_prune_example():
    parents, bits, metrics = split_and_prune(np.array([0.0]), np.array([-2.0]), 4)
    assert parents.tolist() == [0, 0]
    assert bits.tolist() == [0, 1]
    assert metrics.tolist() == [2.0, 0.0]
    parents, bits, metrics = split_and_prune(np.array([0.0, 1.0]), np.array([3.0, -0.5]), 2)
    assert list(zip(parents.tolist(), bits.tolist())) == [(0, 0), (1, 1)]
    assert metrics.tolist() == [0.0, 1.0]


@settings(max_examples=60)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(-4, 4)), min_size=1, max_size=8), st.integers(1, 10))
def test_heap_selection_matches_vectorized_pruning(paths, list_size):
    metrics = np.array([float(m) for m, _ in paths])
    alphas = np.array([float(a) for _, a in paths])
    parents, bits, kept = split_and_prune(metrics, alphas, list_size)
    v_parents, v_bits, v_kept = prune_frames(metrics[None, :], alphas[None, :], list_size)
    np.testing.assert_array_equal(parents, v_parents[0])
    np.testing.assert_array_equal(bits, v_bits[0])
    np.testing.assert_array_equal(kept, v_kept[0])


def test_scl_decode_takes_one_frame(fig2_spec):
    with pytest.raises(ValueError):
        scl_decode(fig2_spec, np.ones((2, 8)), ListConfig(2))


def test_single_frame_sc_and_list_of_one_agree_on_codeword(fig2_spec, rng):
    llrs = rng.normal(0.5, 2.0, 8)
    _, codeword = sc_decode(fig2_spec, llrs)
    np.testing.assert_array_equal(scl_decode(fig2_spec, llrs, ListConfig(1))[0].codeword, codeword)


class _ReversedPaths(ListDecision):
    """List decisions that store each frame's surviving paths in reverse order."""

    def decide(self, state, spec, phase):
        bits = super().decide(state, spec, phase)
        per_frame = state.paths // self.frames
        if per_frame == 1:
            return bits
        order = (np.arange(per_frame)[::-1] + per_frame * np.arange(self.frames)[:, None]).ravel()
        state.take(order)
        return bits[order]


def _survivors(spec, llrs, list_size):
    paths = scl_decode(spec, llrs, ListConfig(list_size), DecoderOptions(debug=True))
    return sorted((p.metric, tuple(p.codeword)) for p in paths)


@pytest.mark.parametrize('list_size', [2, 4, 8])
def test_decoding_does_not_depend_on_path_row_order(add_spec_16, rng, monkeypatch, list_size):
    import scl_decoder

    llrs = rng.normal(1.0, 2.0, add_spec_16.n)
    expected = _survivors(add_spec_16, llrs, list_size)
    monkeypatch.setattr(scl_decoder, 'ListDecision', _ReversedPaths)
    assert _survivors(add_spec_16, llrs, list_size) == expected


def test_a_broken_frame_does_not_leak_into_its_neighbours(case3_spec, rng):
    _, _, llrs = _noisy(case3_spec, rng, 2, 1.0)
    llrs[1] = np.nan
    result = scl_decode_batch(case3_spec, llrs, ListConfig(4), DecoderOptions(debug=False), check_finite=False)
    alone = scl_decode(case3_spec, llrs[0], ListConfig(4))[0]
    np.testing.assert_array_equal(result.messages[0], alone.message)
    np.testing.assert_array_equal(result.codewords[0], alone.codeword)
    assert result.metrics[0] == alone.metric
