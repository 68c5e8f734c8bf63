"""Bound evaluator oracles and verifier behavior tests."""

import math

import numpy as np
import pytest

from phasealign.bounds import (
    BoundCheckResult,
    alpha_bound,
    edge_probability,
    edge_probability_paper_bounds,
    lemma1_color_bound,
    lemma3_tail_bound,
    lemma4_modulus,
    theorem_envelopes,
    verify_alpha_bound,
    verify_color_bound,
    verify_direction_continuity,
    verify_edge_probability,
    verify_power_reduction,
    verify_tail_bound,
)
from phasealign.seeding import make_generator


# ------------------------------------------------------- edge probability


def test_edge_probability_degenerate_regions():
    # threshold at or above 1 clamps to an empty graph
    assert edge_probability(100, math.pi) == 0.0
    assert edge_probability(2, 0.1) == 0.0
    # a tiny threshold makes every pair interfere
    assert edge_probability(10**6, 1e-9) == pytest.approx(1.0, abs=1e-12)


def test_edge_probability_monotone_in_constant():
    ps = [edge_probability(4096, c) for c in (0.1, 0.3, 0.5, 1.0, 2.0)]
    assert all(a >= b for a, b in zip(ps, ps[1:]))


def test_edge_probability_matches_direct_sampling():
    # independent oracle: draw phase pairs, threshold the cosine magnitudes
    k, c = 4096, 0.5
    t = c / math.sqrt(math.log(k))
    gen = make_generator(99)
    n = 1_000_000
    a = np.abs(np.cos(gen.uniform(-math.pi, math.pi, n)))
    b = np.abs(np.cos(gen.uniform(-math.pi, math.pi, n)))
    emp = float(((a > t) | (b > t)).mean())
    se = math.sqrt(emp * (1 - emp) / n)
    assert abs(edge_probability(k, c) - emp) <= 3 * se


def test_edge_probability_rejects_bad_constant():
    with pytest.raises(ValueError):
        edge_probability(100, 0.0)
    with pytest.raises(ValueError):
        edge_probability(100, -1.0)


def test_paper_bracket_values_and_containment():
    k = math.exp(20.0)
    br = edge_probability_paper_bounds(k)
    assert br.lower == pytest.approx(0.2, abs=1e-12)
    assert br.upper == pytest.approx(0.95, abs=1e-12)
    assert not br.lower_vacuous
    p = edge_probability(k, math.pi)
    assert br.lower <= p <= br.upper


def test_paper_bracket_vacuous_region():
    br = edge_probability_paper_bounds(100)
    assert br.lower < 0.0
    assert br.lower_vacuous


# ------------------------------------------------------------ color bound


def test_color_bound_frozen_value():
    got = lemma1_color_bound(10**6)
    assert got.applicable
    lk = math.log(10**6)
    llk = math.log(lk)
    assert got.value == pytest.approx(10**6 * llk / (lk - 3 * llk) + 1, rel=1e-12)
    assert got.value == pytest.approx(4.42e5, rel=0.01)


def test_color_bound_inapplicable_small_k():
    assert not lemma1_color_bound(100).applicable
    assert not lemma1_color_bound(10).applicable


def test_color_bound_applicable_at_preset_scale():
    got = lemma1_color_bound(2**15)
    assert got.applicable
    assert got.value < 2**15


# ----------------------------------------------------- independence bound


def test_alpha_bound_exact_value():
    assert alpha_bound(math.exp(10.0), 1 - 1 / math.e) == pytest.approx(20.0, abs=1e-9)


def test_alpha_bound_monotone_decreasing_in_p():
    vals = [alpha_bound(1000, p) for p in (0.1, 0.3, 0.5, 0.7, 0.9, 0.99)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_alpha_bound_rejects_degenerate_p():
    for p in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(ValueError):
            alpha_bound(100, p)


# ------------------------------------------------------------- tail bound


def test_tail_bound_values():
    assert lemma3_tail_bound(32.0, 5) == 1.0
    assert lemma3_tail_bound(64.0, 8) == pytest.approx(math.exp(-8.0), rel=1e-12)
    assert lemma3_tail_bound(8.0, 16) > 1.0  # vacuous below r = 32
    with pytest.raises(ValueError):
        lemma3_tail_bound(-1.0, 4)
    with pytest.raises(ValueError):
        lemma3_tail_bound(10.0, 0)


# ---------------------------------------------------- perturbation modulus


def test_modulus_values():
    assert lemma4_modulus(1) == (0.5, 4.0)
    radius, cap = lemma4_modulus(4)
    assert radius == pytest.approx(1.0 / 32.0, abs=1e-15)
    assert cap == 4.0
    with pytest.raises(ValueError):
        lemma4_modulus(0)


# --------------------------------------------------------------- envelopes


def test_envelopes_at_e_to_the_e():
    k = math.exp(math.e)
    ach, conv = theorem_envelopes(k)
    assert ach == pytest.approx(math.e, rel=1e-12)
    assert conv == pytest.approx(192.0 * math.e + 4.0, rel=1e-12)


def test_envelope_ratio_grows():
    ratios = []
    for exp in range(4, 21):
        ach, conv = theorem_envelopes(2**exp)
        ratios.append(conv / ach)
    assert all(a < b for a, b in zip(ratios, ratios[1:]))


def test_envelopes_reject_tiny_k():
    with pytest.raises(ValueError):
        theorem_envelopes(2)


# -------------------------------------------------------------- verifiers


def test_verify_edge_probability_passes():
    res = verify_edge_probability(512, 0.4, trials=40, seed=11)
    assert res.passed
    assert res.std_error > 0.0
    assert abs(res.empirical - res.analytic) <= 3 * res.std_error


def test_edge_count_direct_matches_builder():
    # the angular band test must count exactly what the graph builder does,
    # including the no-edge guard (K <= 2) and thresholds at or above 1
    from phasealign.alignment import alignment_threshold, build_graph
    from phasealign.bounds import _edge_count_direct
    from phasealign.channel import effective_gains, sample_channel
    from phasealign.seeding import derive_seed

    cases = ((8, 0.4), (64, 0.5), (257, 0.3), (512, 1.2), (2, 0.4),
             (16, math.pi))
    for s, (k, c) in enumerate(cases):
        ch = sample_channel(k, derive_seed(9, s))
        direct = _edge_count_direct(ch, alignment_threshold(k, c))
        assert direct == build_graph(effective_gains(ch), c).edge_count


def test_verify_edge_probability_catches_wrong_constant():
    # evaluate the graph at one constant but claim another: must fail
    res = verify_edge_probability(512, 0.4, trials=40, seed=11)
    wrong = edge_probability(512, 0.8)
    assert abs(res.empirical - wrong) > 3 * res.std_error


def test_verify_color_bound_inapplicable_is_flagged_pass():
    res = verify_color_bound(100, trials=5, seed=0)
    assert res.passed
    assert not res.applicable
    assert res.note != ""


def test_verify_color_bound_small_applicable_case():
    # K large enough for an applicable bound, threshold small enough for a
    # nontrivial graph: greedy should stay well inside the bound
    res = verify_color_bound(6000, trials=3, seed=5, threshold_constant=0.4)
    assert res.applicable
    assert res.passed
    assert res.empirical == 0.0


def test_verify_power_reduction_zero_violations():
    res = verify_power_reduction(trials=80, seed=3)
    assert res.passed
    assert res.empirical == 0.0
    assert "worst" in res.note


def test_verify_tail_bound_nonvacuous():
    res = verify_tail_bound(8, 64.0, trials=3000, seed=7)
    assert res.passed
    assert res.empirical == 0.0  # sum rate is capped at 8 ln 3 < 64
    assert res.note == ""


def test_verify_tail_bound_vacuous_flagged():
    res = verify_tail_bound(8, 8.0, trials=500, seed=7)
    assert res.passed
    assert res.analytic > 1.0
    assert "vacuous" in res.note


def test_verify_tail_bound_chunking_is_stable():
    a = verify_tail_bound(4, 16.0, trials=4000, seed=9, chunk=1000)
    b = verify_tail_bound(4, 16.0, trials=4000, seed=9, chunk=1000)
    assert a == b


def test_verify_direction_continuity_all_pass():
    results = verify_direction_continuity(2, trials=2000, seed=2, fd_points=40)
    assert len(results) == 3
    by_name = {r.bound_name: r for r in results}
    assert by_name["perturbation_cap"].passed
    assert by_name["perturbation_cap"].empirical <= 4.0
    assert by_name["gradient_finite_difference"].passed
    assert by_name["gradient_component_cap"].passed
    assert by_name["gradient_component_cap"].analytic == 8.0


def test_verify_alpha_bound_passes():
    res = verify_alpha_bound(50, 0.5, trials=30, seed=4)
    assert res.passed
    assert res.analytic == 0.05
    with pytest.raises(ValueError):
        verify_alpha_bound(65, 0.5, trials=2, seed=0)


def test_result_dataclass_shape():
    res = BoundCheckResult(bound_name="x", k=1, s=2, trials=3, empirical=0.1,
                           analytic=0.2, passed=True, std_error=0.01)
    assert res.applicable
    assert res.note == ""
