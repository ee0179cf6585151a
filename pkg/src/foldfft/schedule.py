"""Folding sets for 2-parallel FFT and IFFT datapaths.

A schedule assigns every butterfly of a flow graph an absolute start
cycle; the folding set of a stage's processing element (PE) is that
assignment taken modulo the folding factor.  One PE per stage; the
butterfly PE is combinational (pipeline depth 0), so a node may consume a
value produced in its own cycle.

Single-channel frames stream x[2c], x[2c+1] at cycle c (folding factor
N/2).  Interleaved two-channel frames stream channel X one sample per
cycle on lane 0 and channel Y one sample per cycle on lane 1, N/2 cycles
behind X (folding factor N).
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field

from .flowgraph import (
    FORWARD,
    INVERSE,
    FlowGraph,
    build_fft_flowgraph,
    build_ifft_flowgraph,
    log2_exact,
)

SCHED_FORMAT = "foldfft-sched-v1"
SINGLE = None
X, Y = "X", "Y"
INTERLEAVED = (X, Y)


def stage_letter(stage: int) -> str:
    return chr(ord("A") + stage)


def node_label(stage: int, index: int, channel=None) -> str:
    """Display label, e.g. ``A4`` or ``B'3`` (primed = channel Y)."""
    return f"{stage_letter(stage)}{chr(39) if channel == Y else ''}{index}"


def parse_label(label: str) -> tuple[str | None, int, int]:
    stage = ord(label[0]) - ord("A")
    if label[1] == "'":
        return Y, stage, int(label[2:])
    return None, stage, int(label[1:])


@dataclass(frozen=True)
class FoldingSet:
    pe: str
    folding_factor: int
    # slot p: (index, channel) executing at cycles == p (mod T), or None
    slots: tuple

    def labels(self) -> list[str]:
        stage = ord(self.pe) - ord("A")
        return ["-" if s is None else node_label(stage, s[0], s[1]) for s in self.slots]

    def utilization(self) -> float:
        return sum(s is not None for s in self.slots) / self.folding_factor

    def __str__(self) -> str:
        return f"{self.pe} = {{{', '.join(self.labels())}}}"


@dataclass
class Schedule:
    name: str
    n_points: int
    direction: str
    folding_factor: int
    channels: tuple
    # (channel, stage, index) -> absolute start cycle
    start: dict
    # (channel, input position) -> (arrival cycle, lane)
    input_times: dict
    reoc_required: bool = False
    extra_dsd_units: int = 0
    notes: list = field(default_factory=list)

    @property
    def interleaved(self) -> bool:
        return self.channels == INTERLEAVED

    @property
    def n_stages(self) -> int:
        return self.n_points.bit_length() - 1

    def folding_sets(self) -> list[FoldingSet]:
        out = []
        for s in range(self.n_stages):
            slots = [None] * self.folding_factor
            for (ch, stage, idx), cycle in self.start.items():
                if stage == s:
                    slots[cycle % self.folding_factor] = (idx, ch)
            out.append(FoldingSet(stage_letter(s), self.folding_factor, tuple(slots)))
        return out

    def temporal_order(self, stage: int, channel=None) -> list[int]:
        """Node indices of one stage and channel sorted by start cycle."""
        items = [(c, i) for (ch, s, i), c in self.start.items() if s == stage and ch == channel]
        return [i for _, i in sorted(items)]

    def to_json(self) -> str:
        doc = {
            "format": SCHED_FORMAT,
            "name": self.name,
            "n_points": self.n_points,
            "direction": self.direction,
            "folding_factor": self.folding_factor,
            "channels": list(self.channels) if self.interleaved else [],
            "folding_sets": {fs.pe: fs.labels() for fs in self.folding_sets()},
            "start_cycles": {node_label(s, i, ch): c for (ch, s, i), c in sorted(
                self.start.items(), key=lambda kv: (kv[0][1], kv[1]))},
            "input_times": [
                {"channel": ch, "position": p, "cycle": c, "lane": lane}
                for (ch, p), (c, lane) in sorted(self.input_times.items(), key=lambda kv: kv[1])
            ],
            "reoc_required": self.reoc_required,
            "extra_dsd_units": self.extra_dsd_units,
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "Schedule":
        doc = json.loads(text)
        if doc.get("format") != SCHED_FORMAT:
            raise ValueError(f"unsupported schedule format {doc.get('format')!r}")
        channels = tuple(doc["channels"]) if doc["channels"] else (SINGLE,)
        start = {}
        for label, cycle in doc["start_cycles"].items():
            ch, s, i = parse_label(label)
            if channels == INTERLEAVED and ch is None:
                ch = X
            start[(ch, s, i)] = cycle
        inputs = {(r["channel"], r["position"]): (r["cycle"], r["lane"]) for r in doc["input_times"]}
        return cls(doc["name"], doc["n_points"], doc["direction"], doc["folding_factor"], channels,
                   start, inputs, doc["reoc_required"], doc["extra_dsd_units"])


def fft_input_times(n_points: int, interleaved: bool = False) -> dict:
    log2_exact(n_points)
    if not interleaved:
        return {(SINGLE, p): (p // 2, p % 2) for p in range(n_points)}
    times = {(X, p): (p, 0) for p in range(n_points)}
    times.update({(Y, p): (p + n_points // 2, 1) for p in range(n_points)})
    return times


def _position_avail(input_times: dict) -> dict:
    return {key: cycle for key, (cycle, _) in input_times.items()}


def list_schedule(graph: FlowGraph, input_times: dict, channels: tuple) -> dict:
    """Resource-constrained ASAP list scheduling, one PE per stage.

    A butterfly is ready once both input positions hold values.  Each
    cycle the PE starts the ready butterfly that comes first in stream
    order, i.e. lowest (channel, row rank).
    """
    order = {ch: i for i, ch in enumerate(channels)}
    avail = _position_avail(input_times)
    start = {}
    for s in range(graph.n_stages):
        pending = []
        for ch in channels:
            for node in graph.stage_nodes(s):
                ready = max(avail[(ch, node.upper)], avail[(ch, node.lower)])
                pending.append((ready, order[ch], graph.rank[node.key], ch, node))
        pending.sort(key=lambda item: item[0])
        heap: list = []
        i = 0
        cycle = pending[0][0]
        while i < len(pending) or heap:
            while i < len(pending) and pending[i][0] <= cycle:
                ready, chi, rank, ch, node = pending[i]
                heapq.heappush(heap, (chi, rank, node.index, ch, node))
                i += 1
            if heap:
                _, _, _, ch, node = heapq.heappop(heap)
                start[(ch, s, node.index)] = cycle
                cycle += 1
            else:
                cycle = pending[i][0]
        for (ch, stage, idx), c in list(start.items()):
            if stage == s:
                node = graph.node_map[(s, idx)]
                avail[(ch, node.upper)] = c
                avail[(ch, node.lower)] = c
    return start


def check_schedule(schedule: Schedule, graph: FlowGraph) -> None:
    """Raise ValueError on missing nodes, PE conflicts or causality violations."""
    expected = {(ch, n.stage, n.index) for ch in schedule.channels for n in graph.nodes}
    if set(schedule.start) != expected:
        raise ValueError("schedule does not cover exactly the graph's butterflies")
    seen = set()
    for (ch, s, i), c in schedule.start.items():
        slot = (s, c % schedule.folding_factor)
        if slot in seen:
            raise ValueError(f"PE {stage_letter(s)} has two operations in time partition {slot[1]}")
        seen.add(slot)
    avail = _position_avail(schedule.input_times)
    for s in range(graph.n_stages):
        nxt = {}
        for ch in schedule.channels:
            for node in graph.stage_nodes(s):
                c = schedule.start[(ch, s, node.index)]
                ready = max(avail[(ch, node.upper)], avail[(ch, node.lower)])
                if c < ready:
                    raise ValueError(
                        f"{node_label(s, node.index, ch)} starts at {c} before its inputs ({ready})")
                nxt[(ch, node.upper)] = nxt[(ch, node.lower)] = c
        avail.update(nxt)


def _check_parallelism(parallelism: int) -> None:
    if parallelism != 2:
        raise ValueError(f"only 2-parallel folding is supported, got {parallelism}")


def fft_sequential_schedule(n_points: int, parallelism: int = 2) -> Schedule:
    """Top-to-bottom FFT folding; A_i starts at N/4 + i."""
    _check_parallelism(parallelism)
    graph = build_fft_flowgraph(n_points)
    inputs = fft_input_times(n_points)
    start = list_schedule(graph, inputs, (SINGLE,))
    return Schedule("fft-sequential", n_points, FORWARD, max(1, n_points // 2), (SINGLE,), start, inputs)


def interleaved_fft_schedule(n_points: int) -> Schedule:
    graph = build_fft_flowgraph(n_points)
    inputs = fft_input_times(n_points, interleaved=True)
    start = list_schedule(graph, inputs, INTERLEAVED)
    return Schedule("fft-interleaved", n_points, FORWARD, n_points, INTERLEAVED, start, inputs)


def schedule_output_times(schedule: Schedule, graph: FlowGraph) -> dict:
    """Cycle at which each graph output (natural index) leaves its last butterfly.

    Keys are natural indices for single-channel schedules and
    ``(channel, index)`` pairs for interleaved ones.
    """
    last = graph.n_stages - 1
    out = {}
    for ch in schedule.channels:
        for node in graph.stage_nodes(last):
            c = schedule.start[(ch, last, node.index)]
            for pos in (node.upper, node.lower):
                k = graph.output_permutation[pos]
                out[k if ch is SINGLE else (ch, k)] = c
    return out


def _ifft_input_times(n_points: int, fft_output_times: dict, channels: tuple) -> dict:
    graph = build_ifft_flowgraph(n_points)
    if not isinstance(fft_output_times, dict):
        raise ValueError("availability map must be a dict")
    times = {}
    for ch in channels:
        for pos in range(n_points):
            k = graph.input_permutation[pos]
            key = k if ch is SINGLE else (ch, k)
            if key not in fft_output_times:
                raise ValueError(f"availability map has no entry for output {key!r}")
            cycle = fft_output_times[key]
            if not isinstance(cycle, int) or isinstance(cycle, bool) or cycle < 0:
                raise ValueError(f"bad availability cycle {cycle!r} for output {key!r}")
            # bin k sits at FFT output position bitrev(k) == pos; the last forward
            # stage pairs (2t, 2t+1), so the port (lane) is pos % 2
            times[(ch, pos)] = (cycle, pos % 2)
    expected = n_points * len(channels)
    if len(fft_output_times) != expected:
        raise ValueError(f"availability map has {len(fft_output_times)} entries, expected {expected}")
    return times


def _input_has_slack(graph: FlowGraph, start: dict, input_times: dict, channels) -> bool:
    for ch in channels:
        for node in graph.stage_nodes(0):
            c = start[(ch, 0, node.index)]
            if any(c > input_times[(ch, p)][0] for p in (node.upper, node.lower)):
                return True
    return False


def asap_ifft_schedule(n_points: int, fft_output_times: dict) -> Schedule:
    """IFFT folding that consumes FFT outputs as soon as they appear."""
    graph = build_ifft_flowgraph(n_points)
    inputs = _ifft_input_times(n_points, fft_output_times, (SINGLE,))
    start = list_schedule(graph, inputs, (SINGLE,))
    sched = Schedule("ifft-asap", n_points, INVERSE, max(1, n_points // 2), (SINGLE,), start, inputs)
    sched.reoc_required = _input_has_slack(graph, start, inputs, (SINGLE,))
    return sched


def asap_interleaved_ifft_schedule(n_points: int, fft_output_times: dict) -> Schedule:
    graph = build_ifft_flowgraph(n_points)
    inputs = _ifft_input_times(n_points, fft_output_times, INTERLEAVED)
    start = list_schedule(graph, inputs, INTERLEAVED)
    sched = Schedule("ifft-asap-interleaved", n_points, INVERSE, n_points, INTERLEAVED, start, inputs)
    sched.reoc_required = _input_has_slack(graph, start, inputs, INTERLEAVED)
    return sched


def _reuse_fft_folding(fft: Schedule, n_points: int, name: str) -> Schedule:
    """Copy the FFT's per-PE timing onto the IFFT, shifted as early as causality allows."""
    graph = build_ifft_flowgraph(n_points)
    fwd = build_fft_flowgraph(n_points)
    inputs = _ifft_input_times(
        n_points,
        schedule_output_times(fft, fwd),
        fft.channels,
    )
    anchor = fft.start[(fft.channels[0], 0, 0)]
    rel = {key: c - anchor for key, c in fft.start.items()}
    # only stage A sees the (fixed) FFT output times; later stages shift with it
    offset = 0
    for ch in fft.channels:
        for node in graph.stage_nodes(0):
            ready = max(inputs[(ch, node.upper)][0], inputs[(ch, node.lower)][0])
            offset = max(offset, ready - rel[(ch, 0, node.index)])
    start = {key: offset + r for key, r in rel.items()}
    sched = Schedule(name, n_points, INVERSE, fft.folding_factor, fft.channels, start, inputs)
    check_schedule(sched, graph)
    sched.reoc_required = _input_has_slack(graph, start, inputs, fft.channels)
    return sched


def naive_ifft_schedule(n_points: int) -> Schedule:
    """IFFT reusing the FFT folding sets (needs a reorder buffer in front)."""
    return _reuse_fft_folding(fft_sequential_schedule(n_points), n_points, "ifft-naive")


def naive_interleaved_ifft_schedule(n_points: int) -> Schedule:
    sched = _reuse_fft_folding(interleaved_fft_schedule(n_points), n_points, "ifft-naive-interleaved")
    # de-interleaving before and re-interleaving after the pointwise product
    sched.extra_dsd_units = 2
    return sched
