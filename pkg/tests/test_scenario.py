import csv
import io
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from netimpact import ModelParams, Regime, ScenarioParseError, SimConfig, ValidationError, b_ary_tree, complete_graph
from netimpact.graph import write_edgelist
from netimpact.scenario import (SWEEP_COLUMNS, Axis, ScenarioSpec, SweepSpec, analyze_csv, lever_report,
                                load_graph_for, load_scenario, parse_scenario, preset_description, preset_names,
                                preset_text, run_scenario, simulate_command, sweep_grid, sweep_rows,
                                write_scenario)

PANDEMIC = "label = pandemic\nw = 1\nb = 8\nalpha = 0.7\nq = 0.6\nd = 5\n"


def exact_total(w, b, alpha, q, d):
    r = Fraction(b) * Fraction(alpha) * Fraction(q)
    return Fraction(w) * Fraction(b) * sum(r**j for j in range(d))


# ------------------------------------------------------------------ parsing

def test_parse_pandemic():
    spec = parse_scenario(PANDEMIC)
    assert spec.label == "pandemic"
    assert spec.params == ModelParams(w=1, b=8, alpha=0.7, q=0.6, d=5)
    assert spec.params.ratio == 3.36


def test_parse_defaults_and_comments():
    spec = parse_scenario("# header\nb = 2   # exposure\n\nalpha=0.5\nq = 1\n  d = 3\n")
    assert spec.params.w == 1.0 and spec.label == "scenario" and spec.params.d == 3


def test_domain_violation_names_key():
    with pytest.raises(ScenarioParseError) as info:
        parse_scenario(PANDEMIC.replace("alpha = 0.7", "alpha = 1.5"))
    err = info.value
    assert err.key == "alpha" and err.line == 4 and err.column == 9
    assert isinstance(err, ValidationError)


def test_schedule_of_length_d_minus_one():
    spec = parse_scenario(PANDEMIC + "alpha_schedule = 0.7,0.6,0.5,0.4\n")
    assert spec.alpha_schedule == (0.7, 0.6, 0.5, 0.4)
    sched = spec.schedule()
    assert sched.q == (0.6,) * 4


def test_empty_schedule_for_single_hop():
    spec = parse_scenario("b = 2\nalpha = 0.5\nq = 0.5\nd = 1\nq_schedule =\n")
    assert spec.q_schedule == ()
    with pytest.raises(ScenarioParseError):
        parse_scenario("b = 2\nalpha = 0.5\nq = 0.5\nd = 1\nq =\n")


def test_short_schedule_rejected():
    with pytest.raises(ScenarioParseError) as info:
        parse_scenario(PANDEMIC + "q_schedule = 0.5,0.5\n")
    assert info.value.line == 7


@pytest.mark.parametrize("text,line,key", [
    (PANDEMIC + "beta = 2\n", 7, "beta"),
    (PANDEMIC + "b = 3\n", 7, "b"),
    (PANDEMIC.replace("d = 5", "d = 5.5"), 6, "d"),
    (PANDEMIC.replace("q = 0.6", "q = lots"), 5, "q"),
    (PANDEMIC.replace("q = 0.6", "q = nan"), 5, "q"),
    (PANDEMIC.replace("q = 0.6", "q ="), 5, "q"),
    (PANDEMIC + "alpha_schedule = 0.5,,0.5,0.5\n", 7, "alpha_schedule"),
    (PANDEMIC + "graph = g.txt\n", 7, "graph"),
    ("b = 2\nalpha = 0.5\nq = 1\n", 3, "d"),
])
def test_parse_errors_carry_location(text, line, key):
    with pytest.raises(ScenarioParseError) as info:
        parse_scenario(text)
    assert info.value.line == line and info.value.key == key


def test_missing_equals_sign():
    with pytest.raises(ScenarioParseError) as info:
        parse_scenario("b = 2\n  alpha 0.5\n")
    assert (info.value.line, info.value.column) == (2, 3)


def test_error_message_mentions_line():
    with pytest.raises(ScenarioParseError, match="line 7"):
        parse_scenario(PANDEMIC + "gamma = 1\n")


reals = dict(allow_nan=False, allow_infinity=False)


@st.composite
def specs(draw):
    d = draw(st.integers(1, 12))
    params = ModelParams(w=draw(st.floats(-1e6, 1e6, **reals)), b=draw(st.floats(1, 50, **reals)),
                         alpha=draw(st.floats(1e-6, 1, **reals)), q=draw(st.floats(0, 1, **reals)), d=d)
    n = d - 1
    sched = lambda lo: st.none() | st.lists(st.floats(lo, 1, **reals), min_size=n, max_size=n + 2).map(tuple)
    response = st.none() | st.lists(st.floats(0.01, 10, **reals), min_size=d, max_size=d + 2).map(
        lambda v: tuple(sorted(v, reverse=True)))
    label = draw(st.text(st.characters(min_codepoint=33, max_codepoint=126, blacklist_characters="#"),
                         min_size=1, max_size=12))
    graph = draw(st.none() | st.sampled_from(["g.edges", "/data/net work.txt"]))
    return ScenarioSpec(params, label, draw(sched(1e-6)), draw(sched(0.0)), draw(response), graph,
                        None if graph is None else draw(st.integers(0, 99)))


@settings(max_examples=100)
@given(specs())
def test_write_parse_round_trip(spec):
    assert parse_scenario(write_scenario(spec)) == spec


# ------------------------------------------------------------------ presets

def test_presets_present():
    names = preset_names()
    for name in ("worked-example", "pandemic", "vaccination", "vaccination-friction", "binary-tree",
                 "truncation-demo"):
        assert name in names
        assert preset_description(name)
    with pytest.raises(ValidationError):
        preset_text("nope")


def test_pandemic_preset_documents_rounding():
    text = preset_text("pandemic")
    assert "1448.8" in text and "1448.30" in text


def test_load_scenario_sources(tmp_path):
    path = tmp_path / "s.scn"
    path.write_text(PANDEMIC)
    assert load_scenario(path).spec == load_scenario("pandemic").spec == load_scenario("preset:pandemic").spec
    with pytest.raises(FileNotFoundError):
        load_scenario(tmp_path / "missing.scn")


def test_relative_graph_path_resolves_next_to_file(tmp_path):
    write_edgelist(b_ary_tree(2, 3), tmp_path / "tree.edges")
    path = tmp_path / "s.scn"
    path.write_text("b = 2\nalpha = 1\nq = 1\nd = 3\ngraph = tree.edges\nseed_node = 0\n")
    g = load_graph_for(load_scenario(path))
    assert g.n == 15
    path.write_text("b = 2\nalpha = 1\nq = 1\nd = 3\ngraph = tree.edges\nseed_node = 15\n")
    with pytest.raises(ValidationError):
        load_graph_for(load_scenario(path))


# ------------------------------------------------------------------ reports

def test_vaccination_report():
    rep = run_scenario(load_scenario("vaccination").spec)
    assert rep.regime is Regime.SUPERCRITICAL
    assert rep.total == pytest.approx(float(exact_total(1, 5, 0.6, 0.7, 6)), rel=1e-13)
    assert abs(rep.total / 385.30 - 1) <= 5e-4 and abs(rep.multiplier / 77.06 - 1) <= 5e-4
    assert rep.multiplier_inf is None
    assert set(rep.capture) == {1, 3, 5}
    assert len(rep.hops.per_depth) == 6


def test_friction_report():
    rep = run_scenario(load_scenario("vaccination-friction").spec)
    assert rep.r == 0.6 and rep.regime is Regime.SUBCRITICAL
    assert rep.multiplier_inf == 2.5 and rep.total_inf == 12.5


def test_worked_example_report():
    rep = run_scenario(load_scenario("worked-example").spec)
    assert rep.total == 2031.171875 and rep.multiplier == 406.234375 and rep.dyadic == 5.0


def test_report_with_graph():
    spec = load_scenario("worked-example").spec
    rep = run_scenario(spec, graph=b_ary_tree(5, 7))
    assert rep.graph.total == pytest.approx(2031.171875, rel=1e-12)
    assert rep.graph.rho == 0.0 and rep.graph.convergent
    rep = run_scenario(spec.replace(params=spec.params.replace(d=2)), graph=complete_graph(4))
    assert rep.graph.margin == pytest.approx(1.5, abs=1e-8) and not rep.graph.convergent


def test_report_overflow_is_structured():
    spec = ScenarioSpec(ModelParams(w=1, b=50, alpha=1, q=1, d=400))
    rep = run_scenario(spec)
    assert rep.total is None and rep.overflow == pytest.approx(400 * math.log(50), rel=1e-3)
    assert "overflow" in analyze_csv([rep]).splitlines()[0]


def test_scheduled_total_in_report():
    spec = parse_scenario(PANDEMIC + "q_schedule = 0.6,0.6,0.6,0.6\n")
    rep = run_scenario(spec)
    assert rep.scheduled_total == pytest.approx(rep.total, rel=1e-12)


def test_analyze_csv_is_exact_and_stable():
    reps = [run_scenario(load_scenario(n).spec) for n in ("worked-example", "pandemic", "vaccination")]
    text = analyze_csv(reps)
    assert text == analyze_csv(reps)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert float(rows[0]["T"]) == 2031.171875
    assert float(rows[1]["T"]) == reps[1].total
    assert rows[2]["regime"] == "Supercritical" and rows[0]["M_inf"] == ""


# ------------------------------------------------------------------ sweeps

def test_sweep_pandemic_grid():
    base = parse_scenario(PANDEMIC)
    text = sweep_grid(SweepSpec(base, (Axis("b", (4, 8)), Axis("q", (0.3, 0.6)))))
    lines = text.splitlines()
    assert lines[0] == "label,w,b,alpha,q,d,r,regime,T,M,overflow"
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [(float(r["b"]), float(r["q"])) for r in rows] == [(4, 0.3), (4, 0.6), (8, 0.3), (8, 0.6)]
    assert abs(float(rows[3]["T"]) - 1448.30) <= 0.01
    assert float(rows[3]["T"]) == pytest.approx(float(exact_total(1, 8, 0.7, 0.6, 5)), rel=1e-13)


def test_sweep_depth_one_is_dyadic():
    for name in ("pandemic", "vaccination", "worked-example"):
        base = load_scenario(name).spec
        (row,) = sweep_rows(SweepSpec(base, (Axis("d", (1,)),)))
        assert row["T"] == base.params.w * base.params.b


def test_sweep_regime_flip():
    base = ScenarioSpec(ModelParams(w=1, b=5, alpha=0.5, q=0.1, d=4))
    rows = list(sweep_rows(SweepSpec(base, (Axis.parse("q=0:1:11"),))))
    regimes = {round(r["q"], 10): r["regime"] for r in rows}
    assert regimes[0.3] == "Subcritical" and regimes[0.4] == "Critical" and regimes[0.5] == "Supercritical"
    assert rows[0]["T"] == 5.0


def test_sweep_overflow_column():
    base = ScenarioSpec(ModelParams(w=1, b=50, alpha=1, q=1, d=10))
    rows = list(csv.DictReader(io.StringIO(sweep_grid(SweepSpec(base, (Axis("d", (10, 400)),))))))
    assert rows[0]["overflow"] == "" and rows[1]["T"] == "" and float(rows[1]["overflow"]) > 709


def test_sweep_cap_and_validation():
    base = parse_scenario(PANDEMIC)
    with pytest.raises(ValidationError):
        SweepSpec(base, (Axis.linear("b", 1, 2, 1000), Axis.linear("q", 0, 1, 1001)))
    with pytest.raises(ValidationError):
        SweepSpec(base, (Axis("b", (1, 2)),), max_rows=1)
    with pytest.raises(ValidationError):
        Axis("alpha", (0.5, 1.5))
    with pytest.raises(ValidationError):
        Axis.parse("gamma=1,2")
    with pytest.raises(ValidationError):
        Axis.parse("b=1:2")
    with pytest.raises(ValidationError):
        SweepSpec(base, (Axis("b", (1,)), Axis("b", (2,))))
    assert Axis.parse("d=1,2,3").values == (1, 2, 3)
    assert Axis.parse("b=1:3:3").values == (1.0, 2.0, 3.0)


def test_sweep_to_stream():
    buf = io.StringIO()
    assert sweep_grid(SweepSpec(parse_scenario(PANDEMIC), (Axis("d", (1, 2)),)), buf) is None
    assert buf.getvalue().count("\n") == 3
    assert SWEEP_COLUMNS[-1] == "overflow"


# ------------------------------------------------------------------ levers

def test_pandemic_levers():
    rep = lever_report(load_scenario("pandemic").spec, budget=10)
    got = {lv.name: lv for lv in rep.levers}
    assert got["q"].critical_value == pytest.approx(1 / (8 * 0.7), rel=1e-12)
    assert got["alpha"].critical_value == pytest.approx(1 / (8 * 0.6), rel=1e-12)
    assert got["b"].critical_value == pytest.approx(1 / 0.42, rel=1e-12)
    assert all(lv.status == "feasible" for lv in rep.levers)
    for name, lv in got.items():
        others = {"b": 8, "alpha": 0.7, "q": 0.6}
        others[name] = lv.critical_value
        assert math.prod(others.values()) == pytest.approx(1.0, rel=1e-12)
    assert rep.max_depth == 2


def test_subcritical_levers():
    rep = lever_report(load_scenario("vaccination-friction").spec)
    assert all(lv.status == "already subcritical" for lv in rep.levers)
    assert rep.max_depth is None


@settings(max_examples=200)
@given(b=st.floats(1, 20), alpha=st.floats(0.01, 1), q=st.floats(0.01, 1))
def test_supercritical_levers_always_feasible(b, alpha, q):
    # alpha, q <= 1 <= b means r > 1 forces every single-lever target into its domain
    spec = ScenarioSpec(ModelParams(w=1, b=b, alpha=alpha, q=q, d=3))
    rep = lever_report(spec)
    if rep.regime is Regime.SUPERCRITICAL:
        assert all(lv.status == "feasible" for lv in rep.levers)


def test_out_of_domain_target_still_reported():
    # r = 0.25: reaching r = 1 through q alone would need q = 2
    rep = lever_report(ScenarioSpec(ModelParams(w=1, b=2, alpha=0.25, q=0.5, d=3)))
    got = {lv.name: lv for lv in rep.levers}
    assert got["q"].critical_value == 2.0 and got["alpha"].critical_value == 1.0 and got["b"].critical_value == 8.0
    assert got["q"].status == "already subcritical"


def test_lever_depth_budget_edges():
    spec = load_scenario("pandemic").spec
    assert lever_report(spec, budget=0.5).max_depth == 0
    assert lever_report(spec, budget=4.36).max_depth == 2
    assert lever_report(spec, budget=15.65).max_depth == 3


# ------------------------------------------------------------------ simulation command

def test_simulate_subcritical_preset_consistent():
    rep = simulate_command(load_scenario("vaccination-friction").spec, SimConfig(trials=100_000, master_seed=42))
    assert rep.comparison.consistent and rep.comparison.reliable and rep.mode == "branching"


def test_simulate_tree_preset_exact():
    rep = simulate_command(load_scenario("binary-tree").spec, SimConfig(trials=100, master_seed=1))
    assert rep.result.mean == 14.0 and rep.analytic == 14.0 and rep.comparison.consistent


def test_simulate_truncation_preset_unreliable():
    rep = simulate_command(load_scenario("truncation-demo").spec,
                           SimConfig(trials=20, master_seed=1, max_nodes_per_trial=1000))
    assert rep.result.trials_truncated == 20 and rep.comparison.verdict().startswith("unreliable")


def test_simulate_on_graph_uses_walk_sum():
    spec = ScenarioSpec(ModelParams(w=1, b=2, alpha=0.5, q=0.5, d=2), graph_path="k3", seed_node=0)
    rep = simulate_command(spec, SimConfig(trials=1000, master_seed=3), complete_graph(3))
    assert rep.mode == "graph" and rep.analytic == 3.0 and rep.result.mean == 2.0
