import numpy as np
import pytest

from codespec import CrcSpec, classical
from construction import construct_spec, ga_frozen_set
from decoder_registry import DecoderFactory, SCDecoder, SCLDecoder
from harness import (CSV_COLUMNS, CampaignConfig, ResultRow, count_ops, run_fer_campaign, verify_spec,
                     wilson_interval)
from worker import BatchJob, CampaignError, process_batch


def test_wilson_interval():
    lo, hi = wilson_interval(50, 100)
    assert lo == pytest.approx(0.4038, abs=1e-3)
    assert hi == pytest.approx(0.5962, abs=1e-3)
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0
    assert hi == pytest.approx(0.0370, abs=1e-3)
    assert wilson_interval(100, 100)[1] == 1.0
    assert wilson_interval(7, 7)[1] == 1.0
    assert wilson_interval(0, 3)[0] == 0.0
    assert wilson_interval(0, 1000)[0] == 0.0
    assert wilson_interval(0, 0) == (0.0, 1.0)


def test_campaign_config_validation(fig2_spec):
    with pytest.raises(ValueError):
        CampaignConfig(spec=fig2_spec, min_frame_errors=10)
    with pytest.raises(ValueError):
        CampaignConfig(spec=fig2_spec, decoder='bp')
    with pytest.raises(ValueError):
        CampaignConfig(spec=fig2_spec, snr_grid=())
    with pytest.raises(ValueError):
        CampaignConfig(spec=fig2_spec, list_sizes=(0,))
    with pytest.raises(ValueError):
        CampaignConfig(spec=fig2_spec, mode='fast')
    cfg = CampaignConfig(spec=fig2_spec, decoder='SC', list_sizes=(1, 4))
    assert cfg.decoder == 'sc'
    assert cfg.effective_list_sizes == (1,)


def test_result_row_formatting():
    row = ResultRow(1.5, 4, 1000, 20, 0.02, 0.013, 0.0307, 12.25, 10.0, 1.23456)
    assert row.csv_fields() == ['1.50', '4', '1000', '20', '2.000000e-02', '1.300000e-02', '3.070000e-02',
                                '12.2', '10.0', '1.235']
    assert list(row.to_dict()) == list(CSV_COLUMNS)


def _campaign(spec, **kwargs):
    defaults = dict(decoder='sc', snr_grid=(-2.0,), max_frames=2000, min_frame_errors=20, seed=1,
                    batch_frames=16, workers=1, timing=False)
    defaults.update(kwargs)
    return CampaignConfig(spec=spec, **defaults)


def test_noiseless_campaign_runs_to_max_frames(fig2_spec):
    [row] = run_fer_campaign(_campaign(fig2_spec, snr_grid=(40.0,), max_frames=100, batch_frames=32))
    assert row.frames == 100
    assert row.frame_errors == 0
    assert row.fer == 0.0
    assert row.seconds == 0.0


def test_campaign_stops_at_batch_boundary_after_enough_errors(fig2_spec):
    [row] = run_fer_campaign(_campaign(fig2_spec))
    assert row.frame_errors >= 20
    assert row.frames % 16 == 0
    assert row.frames < 2000
    assert row.ci_lo <= row.fer <= row.ci_hi
    assert row.mean_adds > 0 and row.mean_cmps > 0


def test_campaign_rows_follow_grid_order(add_spec_16):
    rows = run_fer_campaign(_campaign(add_spec_16, decoder='scl', list_sizes=(1, 4), snr_grid=(0.0, -1.0)))
    assert [(row.snr_db, row.list) for row in rows] == [(0.0, 1), (0.0, 4), (-1.0, 1), (-1.0, 4)]


def test_campaign_csv_is_reproducible(fig2_spec, tmp_path):
    first, second = tmp_path / 'a.csv', tmp_path / 'b.csv'
    run_fer_campaign(_campaign(fig2_spec, snr_grid=(-2.0, 0.0), output=str(first)))
    run_fer_campaign(_campaign(fig2_spec, snr_grid=(-2.0, 0.0), output=str(second)))
    text = first.read_text()
    assert text == second.read_text()
    lines = text.splitlines()
    assert lines[0] == ','.join(CSV_COLUMNS)
    assert len(lines) == 3


def test_campaign_result_does_not_depend_on_worker_count(fig2_spec):
    single = run_fer_campaign(_campaign(fig2_spec, workers=1))
    pooled = run_fer_campaign(_campaign(fig2_spec, workers=2))
    assert [r.csv_fields() for r in single] == [r.csv_fields() for r in pooled]


def test_batches_are_reproducible(fig2_spec):
    job = BatchJob(fig2_spec, 'scl', 2, 0.0, 3, 32, 16)
    assert process_batch(job) == process_batch(job)


def test_failed_batch_raises_campaign_error(fig2_spec):
    with pytest.raises(CampaignError):
        process_batch(BatchJob(fig2_spec, 'arikan-sc', 1, 0.0, 0, 0, 4))


def test_count_ops_for_length_two():
    result = count_ops(classical(1, 1, {1}), trials=10)
    assert result.mean_additions == 1.0
    assert result.mean_comparisons == 1.0
    assert result.to_dict() == {'mean_adds': 1.0, 'mean_cmps': 1.0, 'frames': 10}


def test_count_ops_modes(fig2_spec):
    default = count_ops(fig2_spec, trials=20)
    full = count_ops(fig2_spec, trials=20, mode='full')
    assert default.mean_additions + default.mean_comparisons < full.mean_additions + full.mean_comparisons
    assert default == count_ops(fig2_spec, trials=20, seed=99)


def test_count_ops_rejects_unusable_decoders(fig2_spec):
    with pytest.raises(ValueError):
        count_ops(fig2_spec, decoder='bp')
    with pytest.raises(ValueError):
        count_ops(fig2_spec, decoder='arikan-sc')
    with pytest.raises(ValueError):
        count_ops(fig2_spec, trials=0)


def test_list_decoder_costs_more_per_frame(fig2_spec):
    sc = count_ops(fig2_spec, trials=20)
    scl = count_ops(fig2_spec, decoder='scl', list_size=4, trials=20)
    assert scl.mean_comparisons > sc.mean_comparisons


def test_decoder_factory():
    spec = classical(3, 4, {1, 2, 3, 5})
    assert isinstance(DecoderFactory.get_decoder('sc', spec), SCDecoder)
    decoder = DecoderFactory.get_decoder('SCL', spec, list_size=8)
    assert isinstance(decoder, SCLDecoder) and decoder.list_size == 8
    assert DecoderFactory.get_decoder('sc', spec, list_size=8).list_size == 1
    assert DecoderFactory.get_decoder('viterbi', spec) is None
    messages, codewords = DecoderFactory.get_decoder('arikan-scl', spec, 4).decode_batch(np.ones((3, 8)))
    assert messages.shape == codewords.shape == (3, 8)


def test_verify_spec_passes_on_fig2(fig2_spec):
    checks = verify_spec(fig2_spec, trials=50)
    assert [c.name for c in checks] == ['kernels', 'encoder', 'right-separation', 'lemma', 'sc-vs-brute',
                                        'reuse-prune', 'scl-vs-ml']
    assert all(c.passed for c in checks)


def test_verify_spec_skips_exhaustive_checks_for_long_codes():
    checks = {c.name: c for c in verify_spec(classical(5, 16, set(range(1, 17))), trials=20)}
    assert checks['lemma'].passed is None
    assert checks['sc-vs-brute'].passed is None
    assert checks['scl-vs-ml'].passed is None
    assert checks['encoder'].passed and checks['reuse-prune'].passed
    assert checks['lemma'].to_dict()['passed'] is None


@pytest.mark.slow
def test_verify_spec_skips_the_encoder_check_for_very_long_codes():
    checks = {c.name: c for c in verify_spec(classical(13, 1 << 12, set(range(1, (1 << 12) + 1))), trials=2)}
    assert checks['encoder'].passed is None
    assert 'skipped' in checks['encoder'].detail


# Statistical behaviour: two FER estimates are only called different when their
# Wilson intervals do not overlap.

def _not_worse(better, worse):
    return better.ci_lo <= worse.ci_hi


def _ga_code(m=6, k=32):
    return classical(m, k, ga_frozen_set(m, k, 2.0))


def _simulate(spec, **kwargs):
    defaults = dict(min_frame_errors=50, max_frames=20000, batch_frames=256)
    defaults.update(kwargs)
    return run_fer_campaign(_campaign(spec, **defaults))


@pytest.mark.slow
def test_fer_does_not_grow_with_snr():
    rows = _simulate(_ga_code(), snr_grid=(0.0, 1.0, 2.0, 3.0))
    for lower, higher in zip(rows, rows[1:]):
        assert _not_worse(higher, lower)
    assert rows[-1].fer < rows[0].fer


@pytest.mark.slow
def test_fer_does_not_grow_with_list_size():
    single, eight = _simulate(_ga_code(), decoder='scl', list_sizes=(1, 8), snr_grid=(1.5,))
    assert _not_worse(eight, single)


@pytest.mark.slow
def test_ml_list_is_no_worse_than_sc(fig2_spec):
    # 16 paths cover every message of a k=4 code
    sc, ml = _simulate(fig2_spec, decoder='scl', list_sizes=(1, 16), snr_grid=(1.0,))
    assert _not_worse(ml, sc)


@pytest.fixture(scope='module')
def crc_codes():
    crc = CrcSpec(0x07, 8)
    classical_spec = construct_spec(7, 56, 2.0, budget=0, trials=2000, seed=0, crc=crc)
    abs_spec = construct_spec(7, 56, 2.0, budget=2, trials=2000, seed=0, crc=crc)
    return classical_spec, abs_spec


@pytest.mark.slow
def test_abs_code_is_no_worse_than_classical_under_crc_aided_list_decoding(crc_codes):
    classical_spec, abs_spec = crc_codes
    [classical_row] = _simulate(classical_spec, decoder='scl', list_sizes=(8,), snr_grid=(1.5,), batch_frames=128)
    [abs_row] = _simulate(abs_spec, decoder='scl', list_sizes=(8,), snr_grid=(1.5,), batch_frames=128)
    assert _not_worse(abs_row, classical_row)


@pytest.mark.slow
def test_abs_list_of_16_keeps_up_with_classical_list_of_32(crc_codes):
    classical_spec, abs_spec = crc_codes
    [classical_row] = _simulate(classical_spec, decoder='scl', list_sizes=(32,), snr_grid=(1.5,), batch_frames=64)
    [abs_row] = _simulate(abs_spec, decoder='scl', list_sizes=(16,), snr_grid=(1.5,), batch_frames=64)
    assert _not_worse(abs_row, classical_row)
