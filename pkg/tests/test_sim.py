import io
import json

import pytest

from netsup.channels import ChannelParams, build_tightness_witness, build_transformed_plant
from netsup.errors import InvalidParams, MissingAnnotations
from netsup.sim import ClosedLoop, SimConfig, exhaustive_check, simulate


def witness_loop(num_o, num_c, m, capacity=None):
    p = ChannelParams(num_o, num_c, m, cc_capacity=capacity)
    g, alph, bound = build_tightness_witness(p)
    tp = build_transformed_plant(g, alph, p, counters=True)
    return ClosedLoop.build(None, tp), bound


def test_witness_reaches_queue_of_three():
    loop, bound = witness_loop(0, 1, 0)
    res = exhaustive_check(loop)
    assert res.ok
    assert res.max_queue == bound == 3


@pytest.mark.parametrize("num_o", [0, 1])
@pytest.mark.parametrize("num_c", [0, 1])
@pytest.mark.parametrize("m", [0, 1])
def test_invariant_and_tightness(num_o, num_c, m):
    loop, bound = witness_loop(num_o, num_c, m)
    res = exhaustive_check(loop)
    assert res.ok, res.witness
    assert res.max_queue == bound == (num_o + num_c + 2) * (m + 1)


def test_roomier_channel_still_tight():
    loop, bound = witness_loop(1, 1, 1, capacity=(1 + 1 + 2) * 2 + 3)
    res = exhaustive_check(loop)
    assert res.ok
    assert res.max_queue == bound


def test_capacity_below_bound_is_flagged():
    p = ChannelParams(1, 1, 0)
    loop, bound = witness_loop(1, 1, 0, capacity=p.queue_bound - 1)
    res = exhaustive_check(loop)
    assert not res.ok
    _state, monitor, annotation = res.witness
    assert monitor == "capacity-truncation"
    assert annotation[0] == bound - 1


def test_unknown_monitor_rejected():
    loop, _ = witness_loop(0, 0, 0)
    with pytest.raises(InvalidParams):
        exhaustive_check(loop, ["nope"])


def test_simulation_needs_annotations():
    loop, _ = witness_loop(0, 0, 0)
    with pytest.raises(MissingAnnotations):
        simulate(loop.automaton, SimConfig(steps=5))


@pytest.mark.parametrize("kw", [{"steps": 0}, {"loss_bias": 1.5}, {"seed": -1}])
def test_sim_config_validated(kw):
    with pytest.raises(InvalidParams):
        SimConfig(**kw)


def test_marked_dead_end_terminates():
    loop, _ = witness_loop(0, 0, 0)
    report = simulate(loop, SimConfig(seed=3, steps=10_000))
    # the witness plant ends in a marked sink once every channel drains
    assert report.passed
    assert report.terminated_at == report.steps_executed < 10_000
    assert report.deadlocked_at is None


def test_trace_format_and_determinism():
    loop, _ = witness_loop(1, 1, 1)
    runs = []
    for _ in range(2):
        buf = io.StringIO()
        report = simulate(loop, SimConfig(seed=7, steps=200, trace=True), buf)
        runs.append((buf.getvalue(), report.to_json()))
    assert runs[0] == runs[1]
    first = runs[0][0].splitlines()[0]
    assert first.startswith("1 0 --")
    assert "| " in first and len(first.split("|")[1].split()) == 4
    data = json.loads(runs[0][1])
    assert data["passed"] is True


def test_different_seeds_differ():
    loop, _ = witness_loop(1, 1, 1)
    traces = []
    for seed in (1, 2):
        buf = io.StringIO()
        simulate(loop, SimConfig(seed=seed, steps=300, trace=True), buf)
        traces.append(buf.getvalue())
    assert traces[0] != traces[1]


def test_guideway_short_run(guideway_problem, guideway_sup):
    tp, problem = guideway_problem
    loop = ClosedLoop.build(guideway_sup.automaton, tp, problem.bad)
    report = simulate(loop, SimConfig(seed=42, steps=5_000))
    assert report.passed
    assert report.max_queue_seen <= 1
    assert report.max_obs_in_flight <= 2


def test_guideway_permissive_violates(guideway_problem):
    tp, problem = guideway_problem
    loop = ClosedLoop.build(None, tp, problem.bad)
    res = exhaustive_check(loop, ["bad"])
    assert not res.ok
    assert res.witness[1] == "bad"
