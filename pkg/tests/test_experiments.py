"""Sweep orchestration, aggregation, and CSV round-trip tests."""

import math

import numpy as np
import pytest

from phasealign.experiments import (
    CSVFormatError,
    ExperimentConfig,
    TrialRow,
    aggregate,
    envelope_value,
    read_aggregates,
    read_rows,
    run_sweep,
    scaling_fit,
    write_aggregates,
    write_rows,
)

LN2 = math.log(2.0)


def _cfg(**kw):
    base = dict(k_list=(8, 16), trials=3, master_seed=7, threshold_constant=0.4,
                schemes=("phase_align", "tdma_peak"), metric="sinr")
    base.update(kw)
    return ExperimentConfig(**base)


# ----------------------------------------------------------------- config


def test_config_validation():
    with pytest.raises(ValueError):
        _cfg(k_list=())
    with pytest.raises(ValueError):
        _cfg(k_list=(16, 8))
    with pytest.raises(ValueError):
        _cfg(k_list=(8, 8))
    with pytest.raises(ValueError):
        _cfg(trials=0)
    with pytest.raises(ValueError):
        _cfg(schemes=("bogus",))
    with pytest.raises(ValueError):
        _cfg(schemes=())
    with pytest.raises(ValueError):
        _cfg(schemes=("tin", "tin"))
    with pytest.raises(ValueError):
        _cfg(metric="qam")
    with pytest.raises(ValueError):
        _cfg(threshold_constant=0.0)
    with pytest.raises(ValueError):
        _cfg(schemes=("ssa_ascent",), k_list=(65,))
    # at the cap is fine
    _cfg(schemes=("ssa_ascent",), k_list=(64,), trials=1)


# ------------------------------------------------------------------ sweep


def test_single_cell_tdma_peak():
    cfg = _cfg(k_list=(1,), trials=1, schemes=("tdma_peak",))
    res = run_sweep(cfg)
    assert len(res.rows) == 1
    row = res.rows[0]
    assert row.scheme == "tdma_peak"
    assert row.sum_rate_nats == pytest.approx(LN2, abs=1e-15)
    assert row.colors_used is None and row.max_ind_set is None


def test_row_count_and_order():
    cfg = _cfg()
    res = run_sweep(cfg)
    assert len(res.rows) == 2 * 3 * 2
    # grid order: k major, trial next, schemes in config order
    expect = [(k, t, s) for k in (8, 16) for t in range(3)
              for s in ("phase_align", "tdma_peak")]
    assert [(r.k, r.trial, r.scheme) for r in res.rows] == expect


def _payload(rows):
    # everything except the wall-clock timing field
    return [(r.scheme, r.k, r.trial, r.seed, r.threshold_c, r.metric,
             r.sum_rate_nats, r.colors_used, r.max_ind_set, r.ind_set_exact)
            for r in rows]


def test_sweep_is_deterministic():
    cfg = _cfg()
    assert _payload(run_sweep(cfg).rows) == _payload(run_sweep(cfg).rows)


def test_parallel_matches_serial():
    cfg = _cfg(k_list=(8, 16, 32), trials=2)
    serial = run_sweep(cfg, threads=1)
    parallel = run_sweep(cfg, threads=4)
    for a, b in zip(serial.rows, parallel.rows):
        # runtime differs; everything else must match exactly
        assert (a.scheme, a.k, a.trial, a.seed, a.sum_rate_nats,
                a.colors_used, a.max_ind_set, a.ind_set_exact) == \
               (b.scheme, b.k, b.trial, b.seed, b.sum_rate_nats,
                b.colors_used, b.max_ind_set, b.ind_set_exact)


def test_schemes_share_channel_within_trial():
    cfg = _cfg(k_list=(16,), trials=2, schemes=("phase_align", "ssa_ascent"),
               metric="sinr")
    res = run_sweep(cfg)
    seeds = {(r.trial): set() for r in res.rows}
    for r in res.rows:
        seeds[r.trial].add(r.seed)
    for trial_seeds in seeds.values():
        assert len(trial_seeds) == 1


def test_trial_independence():
    a = run_sweep(_cfg(trials=3))
    b = run_sweep(_cfg(trials=2))
    a_sub = [r for r in a.rows if r.trial < 2]
    for x, y in zip(a_sub, b.rows):
        assert (x.scheme, x.k, x.trial, x.seed, x.sum_rate_nats) == \
               (y.scheme, y.k, y.trial, y.seed, y.sum_rate_nats)


def test_phase_align_rows_have_graph_fields():
    cfg = _cfg(k_list=(64,), trials=2, schemes=("phase_align",))
    res = run_sweep(cfg)
    for r in res.rows:
        assert r.colors_used >= 1
        assert r.max_ind_set >= 1
        assert r.ind_set_exact is True  # K = 64 is within the exact cap


def test_ssa_rows():
    cfg = _cfg(k_list=(4,), trials=2, schemes=("ssa_ascent",), ssa_restarts=4)
    res = run_sweep(cfg)
    for r in res.rows:
        assert r.sum_rate_nats >= math.log(3.0) - 1e-9
        assert r.colors_used is None


# -------------------------------------------------------------- aggregate


def test_aggregate_matches_rows():
    cfg = _cfg(k_list=(32,), trials=5, schemes=("phase_align", "tin"))
    res = run_sweep(cfg)
    aggs = aggregate(res.rows)
    assert [(a.scheme, a.k) for a in aggs] == [("phase_align", 32), ("tin", 32)]
    pa = [r.sum_rate_nats for r in res.rows if r.scheme == "phase_align"]
    a = aggs[0]
    assert a.mean_sum_rate == pytest.approx(np.mean(pa), abs=1e-9)
    assert a.std_err == pytest.approx(np.std(pa, ddof=1) / math.sqrt(5), abs=1e-9)
    assert a.p05 == pytest.approx(np.percentile(pa, 5), abs=1e-9)
    assert a.p95 == pytest.approx(np.percentile(pa, 95), abs=1e-9)
    assert a.n == 5


def test_aggregate_skips_nan_rows():
    rows = [TrialRow("tin", 4, t, 1, 0.4, "sinr", float("nan")) for t in range(3)]
    rows.append(TrialRow("tin", 4, 3, 1, 0.4, "sinr", 1.5))
    aggs = aggregate(rows)
    assert len(aggs) == 1
    assert aggs[0].n == 1
    assert aggs[0].mean_sum_rate == 1.5
    assert aggs[0].std_err == 0.0


# ------------------------------------------------------------ scaling fit


def test_scaling_fit_const_baseline():
    cfg = _cfg(k_list=(8, 16, 32), trials=1, schemes=("tdma_peak",))
    res = run_sweep(cfg)
    ratios, slope = scaling_fit(res, "tdma_peak", "const")
    assert all(r == pytest.approx(LN2, abs=1e-12) for _, r in ratios)
    assert slope == pytest.approx(0.0, abs=1e-9)


def test_scaling_fit_bursty_tracks_lnk():
    cfg = _cfg(k_list=(2**8, 2**10, 2**12), trials=1, schemes=("tdma_bursty",))
    res = run_sweep(cfg)
    ratios, slope = scaling_fit(res, "tdma_bursty", "lnK")
    vals = [r for _, r in ratios]
    assert all(v > 1.0 for v in vals)
    assert vals == sorted(vals, reverse=True)  # ln(1+K)/ln K decreases to 1
    assert slope == pytest.approx(1.0, rel=0.05)


def test_scaling_fit_needs_three_points():
    cfg = _cfg(k_list=(8, 16), trials=1, schemes=("tdma_peak",))
    res = run_sweep(cfg)
    with pytest.raises(ValueError):
        scaling_fit(res, "tdma_peak", "const")
    with pytest.raises(ValueError):
        envelope_value("cubic", 8)


# -------------------------------------------------------------------- CSV


def test_rows_round_trip(tmp_path):
    cfg = _cfg(k_list=(8, 16), trials=2, schemes=("phase_align", "tin"))
    res = run_sweep(cfg)
    path = tmp_path / "rows.csv"
    write_rows(path, res.rows)
    back = read_rows(path)
    assert len(back) == len(res.rows)
    for a, b in zip(res.rows, back):
        assert (a.scheme, a.k, a.trial, a.seed, a.metric) == \
               (b.scheme, b.k, b.trial, b.seed, b.metric)
        assert b.sum_rate_nats == pytest.approx(a.sum_rate_nats, rel=1e-11)
        assert b.colors_used == a.colors_used
        assert b.ind_set_exact == a.ind_set_exact
        assert b.runtime_ms is None  # blank by default


def test_rows_csv_bytes_are_stable(tmp_path):
    cfg = _cfg(k_list=(8,), trials=3)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_rows(p1, run_sweep(cfg).rows)
    write_rows(p2, run_sweep(cfg).rows)
    assert p1.read_bytes() == p2.read_bytes()


def test_rows_csv_timings_opt_in(tmp_path):
    cfg = _cfg(k_list=(8,), trials=1, schemes=("tin",))
    res = run_sweep(cfg)
    path = tmp_path / "t.csv"
    write_rows(path, res.rows, include_timings=True)
    back = read_rows(path)
    assert back[0].runtime_ms is not None and back[0].runtime_ms >= 0.0


def test_aggregates_round_trip(tmp_path):
    cfg = _cfg(k_list=(8, 16, 32), trials=4, schemes=("tdma_bursty", "tin"))
    aggs = aggregate(run_sweep(cfg).rows)
    path = tmp_path / "agg.csv"
    write_aggregates(path, aggs)
    back = read_aggregates(path)
    assert [(a.scheme, a.k, a.n) for a in back] == [(a.scheme, a.k, a.n) for a in aggs]
    for a, b in zip(aggs, back):
        assert b.mean_sum_rate == pytest.approx(a.mean_sum_rate, rel=1e-11)


def test_read_rows_names_offending_line(tmp_path):
    path = tmp_path / "bad.csv"
    good = ("scheme,k,trial,seed,threshold_c,metric,sum_rate_nats,"
            "colors_used,max_ind_set,ind_set_exact,runtime_ms\n"
            "tin,4,0,1,0.4,sinr,1.5,,,,\n"
            "tin,oops,1,1,0.4,sinr,1.5,,,,\n")
    path.write_text(good)
    with pytest.raises(CSVFormatError, match="line 3"):
        read_rows(path)


def test_read_aggregates_rejects_empty(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(CSVFormatError, match="line 1"):
        read_aggregates(path)
    path.write_text("scheme,k,mean_sum_rate,std_err,p05,p95,n\n")
    with pytest.raises(CSVFormatError, match="line 2"):
        read_aggregates(path)


def test_read_rows_rejects_bad_header(tmp_path):
    path = tmp_path / "hdr.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(CSVFormatError, match="line 1"):
        read_rows(path)
