import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from foldfft.designs import DESIGNS, build_design, design_schedules, closed_form_targets
from foldfft.flowgraph import build_fft_flowgraph, build_ifft_flowgraph
from foldfft.folding import (
    MUX_PER_REOC,
    FoldedEdge,
    NegativeDelay,
    ReocBuffer,
    ResourceReport,
    cascade,
    count_resources,
    fold,
    lifetime_analysis,
    savings,
    synthesize_dsd,
)
from foldfft.oracle import brute_force_min_registers
from foldfft.schedule import Schedule, fft_sequential_schedule, naive_ifft_schedule


def edge(p, c, name="v"):
    return FoldedEdge(name, 0, p, name, 0, c, None, ("in", 0), ("bfin", "t", 0, 0))


@pytest.fixture(scope="module")
def fft16():
    return fold(build_fft_flowgraph(16), fft_sequential_schedule(16))


def find_edge(net, producer, consumer):
    return next(e for e in net.folded_edges() if e.producer == producer and e.consumer == consumer)


def test_edge_delays_sixteen(fft16):
    assert find_edge(fft16, "A0", "B0").delay == 4
    # D0 at cycle 11 consumes C1's cycle-11 result directly
    assert find_edge(fft16, "C1", "D0").delay == 0
    assert find_edge(fft16, "C0", "D0").delay == 1
    assert all(e.delay >= 0 for e in fft16.folded_edges())


def test_every_edge_folded(fft16):
    g = build_fft_flowgraph(16)
    assert len(fft16.folded_edges()) == len(g.edges)


def test_negative_delay():
    g = build_fft_flowgraph(16)
    good = fft_sequential_schedule(16)
    start = dict(good.start)
    for i in range(8):  # stage B one period early: same slots, B0 now precedes A0
        start[(None, 1, i)] -= 8
    bad = Schedule("bad", 16, good.direction, 8, good.channels, start, good.input_times)
    with pytest.raises(NegativeDelay) as info:
        fold(g, bad)
    assert info.value.edge.consumer == "B0" and info.value.edge.delay < 0


def test_fold_rejects_mismatched_graph():
    with pytest.raises(ValueError):
        fold(build_ifft_flowgraph(16), fft_sequential_schedule(16))


def test_lifetime_trivial_cases():
    assert lifetime_analysis([edge(5, 5)], 8) == 0
    # one value per frame: ceil(d / T) registers
    for d, regs in ((1, 1), (3, 1), (8, 1), (13, 2), (17, 3)):
        assert lifetime_analysis([edge(2, 2 + d)], 8) == regs
    # a value every cycle, each held d cycles: a d-stage delay line
    for d in (1, 3, 8, 13):
        assert lifetime_analysis([edge(p, p + d) for p in range(8)], 8) == d
    assert lifetime_analysis([], 4) == 0


def test_lifetime_matches_oracle_on_dsd(fft16):
    for unit in fft16.units:
        intervals = [e.interval for e in unit.edges]
        assert unit.registers == brute_force_min_registers(intervals, 8) == lifetime_analysis(unit.edges, 8)
    assert fft16.units[1].position == "A->B"
    assert fft16.units[1].registers == 8


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 16).flatmap(lambda T: st.tuples(
    st.just(T),
    st.lists(st.tuples(st.integers(0, 40), st.integers(0, 40)), max_size=16))))
def test_lifetime_matches_oracle_random(case):
    T, raw = case
    edges = [edge(p, p + d) for p, d in raw]
    assert lifetime_analysis(edges, T) == brute_force_min_registers([e.interval for e in edges], T)


def drive_unit(unit, frames=4):
    """Push tagged values through a unit's switch schedule; return what each consumer sees."""
    T = unit.folding_factor
    rt = unit.routing
    regs = {}
    seen = {}
    lo = min(e.producer_cycle for e in unit.edges)
    hi = max(e.consumer_cycle for e in unit.edges) + (frames - 1) * T
    for t in range(lo, hi + 1):
        r = t % T
        wire = {}
        for i, e in enumerate(unit.edges):
            f, rem = divmod(t - e.producer_cycle, T)
            if rem == 0 and 0 <= f < frames:
                wire[i] = (i, f)
        for i, (kind, v) in rt.deliveries[r]:
            e = unit.edges[i]
            f, rem = divmod(t - e.consumer_cycle, T)
            if 0 <= f < frames:
                seen[(i, f)] = wire.get(v) if kind == "wire" else regs.get(v)
        nxt = dict(regs)
        for slot, (kind, v) in rt.loads[r]:
            nxt[slot] = wire.get(v) if kind == "wire" else regs.get(v)
        regs = nxt
    return seen


@pytest.mark.parametrize("design", DESIGNS)
def test_reorder_units_deliver_scheduled_values(design):
    net = build_design(design, 16)
    for unit in net.units:
        if not unit.edges:
            continue
        seen = drive_unit(unit)
        assert seen == {(i, f): (i, f) for i in range(len(unit.edges)) for f in range(4)}, unit.name
        assert unit.routing.slots_used == unit.registers


def test_switch_schedule_period():
    assert all(len(u.switch_schedule()) == 8 for u in build_design("proposed1", 16).units)
    assert all(len(u.switch_schedule()) == 16 for u in build_design("proposed2", 16).units)


def test_synthesize_dsd_sizes_to_lifetime():
    edges = [edge(0, 4, "a"), edge(1, 3, "b"), edge(2, 2, "c"), edge(3, 6, "d")]
    unit = synthesize_dsd(edges, 4)
    # time partition 1 holds a, b and d (d from the previous frame)
    assert unit.registers == lifetime_analysis(edges, 4) == 3
    assert drive_unit(unit) == {(i, f): (i, f) for i in range(4) for f in range(4)}
    with pytest.raises(NegativeDelay):
        synthesize_dsd([edge(3, 1)], 4)


def test_cascade_structure():
    prop = build_design("proposed1", 16)
    naive = build_design("baseline", 16)
    naive2 = build_design("baseline-interleaved", 16)
    prop2 = build_design("proposed2", 16)
    assert prop.reoc is None and prop2.reoc is None
    assert not any(isinstance(u, ReocBuffer) for u in prop.all_units() + prop2.all_units())
    assert sum(isinstance(u, ReocBuffer) for u in naive.all_units()) == 1
    assert naive.reoc.mux_count == MUX_PER_REOC == 4
    assert len(naive.reoc.register_sets) == 2 and sum(naive.reoc.register_sets) == naive.reoc.registers
    assert len(naive2.extra_units) == 2 and naive2.reoc is not None
    assert {u.kind for u in naive2.extra_units} == {"deinterleave", "reinterleave"}
    for net in (prop, naive, naive2, prop2):
        assert net.multiplier and len(net.bfs) == 8 and net.lanes == 2


def test_proposed_ifft_half_mirrors_fft_hardware():
    net = build_design("proposed1", 64)
    fft_dsds = sorted(u.registers for u in net.units if u.name.startswith("fft.DSD"))
    ifft_dsds = sorted(u.registers for u in net.units if u.name.startswith("ifft.DSD"))
    assert fft_dsds == ifft_dsds


def _halves(design, n):
    f, i = design_schedules(design, n)
    return fold(build_fft_flowgraph(n), f), fold(build_ifft_flowgraph(n), i)


def test_cascade_errors():
    fft, ifft = _halves("baseline", 16)
    with pytest.raises(ValueError, match="REOC"):
        cascade(fft, ifft, reoc=False)
    other, _ = _halves("proposed2", 16)
    with pytest.raises(ValueError, match="lane-rate"):
        cascade(other, ifft, reoc=True)
    fft8, _ = _halves("baseline", 8)
    with pytest.raises(ValueError, match="lane-rate"):
        cascade(fft8, ifft, reoc=True)


@pytest.mark.parametrize("n", [16, 64, 256, 1024])
def test_proposed_closed_forms(n):
    for design in ("proposed1", "proposed2"):
        rep = count_resources(build_design(design, n), design)
        want = closed_form_targets(design, n)
        assert (rep.memory_elements, rep.fifo_latency, rep.mux_count, rep.bf_count, rep.throughput) == \
            (want["memory"], want["latency"], want["mux"], want["bf"], 2)


def test_baseline_closed_forms_at_sixteen():
    rep = count_resources(build_design("baseline", 16))
    assert (rep.memory_elements, rep.fifo_latency, rep.mux_count) == (42, 21, 18)
    rep = count_resources(build_design("baseline-interleaved", 16))
    assert (rep.memory_elements, rep.mux_count) == (66, 20)


@pytest.mark.parametrize("n", [4, 8, 16, 32, 64, 128, 256, 512, 1024])
def test_mux_closed_forms(n):
    for design in DESIGNS:
        assert count_resources(build_design(design, n)).mux_count == closed_form_targets(design, n)["mux"]


@pytest.mark.parametrize("n", [8, 16, 64])
@pytest.mark.parametrize("design", DESIGNS)
def test_memory_is_sum_of_lifetime_minima(design, n):
    net = build_design(design, n)
    rep = count_resources(net)
    by_lifetime = 0
    for u in net.all_units():
        groups = {}
        for e in u.edges:
            groups.setdefault(u._key(e), []).append(e)
        by_lifetime += sum(lifetime_analysis(g, net.folding_factor) for g in groups.values())
    by_allocation = sum(u.routing.slots_used for u in net.all_units() if u.edges)
    assert rep.memory_elements == by_lifetime == by_allocation


def test_savings():
    a = ResourceReport("a", 16, 4, 36, 14, 18)
    assert all(v == 0 for v in savings(a, a).values())
    b = ResourceReport("b", 16, 4, 42, 18, 21)
    d = savings(a, b)
    assert d["memory_elements"] == 6 and d["fifo_latency"] == 3
    assert d["memory_elements_pct"] == pytest.approx(100 * 6 / 42)


def test_report_csv_row():
    rep = count_resources(build_design("proposed1", 16), "proposed1")
    assert ResourceReport.CSV_HEADER == "design,N,bf,memory,mux,latency,throughput"
    assert rep.to_csv_row() == "proposed1,16,4,36,14,18,2"
    assert rep.bf_total == 8
    assert any("mux weights" in note for note in rep.notes)


def test_netlist_json():
    net = build_design("baseline", 16)
    doc = json.loads(net.to_json())
    assert doc["format"] == "foldfft-netlist-v1"
    assert doc["reoc"]["mux"] == 4
    assert sum(u["registers"] for u in doc["units"]) == count_resources(net).memory_elements
    assert all(u["switch_period"] == 8 for u in doc["units"])
    assert len(doc["butterflies"]) == 8


@pytest.mark.parametrize("design", DESIGNS)
def test_structural_latency_of_standalone_fft(design):
    fft, _ = _halves(design, 16)
    assert fft.structural_latency() == (11 if fft.channels == (None,) else 15)
