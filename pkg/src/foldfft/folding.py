"""Folding a scheduled flow graph into a 2-lane streaming datapath.

Every graph edge becomes a :class:`FoldedEdge` whose delay is the number
of cycles its value waits between the producing and consuming PE.  Edges
crossing the same stage boundary are implemented by one reorder unit
(delay-switch-delay, commutator or reorder buffer) sized by lifetime
analysis.  Register counts, MUX counts and latency are rolled up into a
:class:`ResourceReport`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .flowgraph import FORWARD, INVERSE, FlowGraph
from .schedule import Schedule, check_schedule, node_label, stage_letter, INTERLEAVED

NETLIST_FORMAT = "foldfft-netlist-v1"

# MUX counting.  The reference totals give no breakdown, so the per-unit weights are a
# calibration: a register-carrying reorder unit (DSD or commutator) counts
# one 2:1 multiplexer per lane, the reorder buffer counts four, and the
# lane-steering units of the naive interleaved cascade carry no registers
# and are not counted.
MUX_PER_DSD = 2
MUX_PER_REOC = 4
MUX_PER_LANE_STEERING = 0
MUX_CALIBRATION_NOTE = (
    f"mux weights: DSD/commutator with registers={MUX_PER_DSD}, REOC={MUX_PER_REOC}, "
    f"de/re-interleaving lane steering={MUX_PER_LANE_STEERING}, register-free wiring=0"
)


class NegativeDelay(ValueError):
    """A consumer is scheduled before its producer (infeasible folding)."""

    def __init__(self, edge: "FoldedEdge"):
        self.edge = edge
        super().__init__(
            f"edge {edge.producer}->{edge.consumer} has negative delay {edge.delay} "
            f"(produced at {edge.producer_cycle}, consumed at {edge.consumer_cycle})"
        )


@dataclass(frozen=True)
class FoldedEdge:
    producer: str
    producer_port: int
    producer_cycle: int
    consumer: str
    consumer_port: int
    consumer_cycle: int
    channel: str | None
    # datapath wires: ("in", lane), ("bfout", tag, stage, port),
    # ("bfin", tag, stage, port) or ("out", lane)
    src_wire: tuple
    dst_wire: tuple

    @property
    def delay(self) -> int:
        return self.consumer_cycle - self.producer_cycle

    @property
    def interval(self) -> tuple[int, int]:
        return (self.producer_cycle, self.consumer_cycle)


def lifetime_analysis(edges, folding_factor: int) -> int:
    """Minimum register count for an edge set in periodic steady state.

    A value occupies a register from the end of its production cycle until
    the end of the cycle before it is consumed.  Values of successive
    frames repeat every *folding_factor* cycles, so the live count is
    accumulated per time partition (cycle mod T) and the maximum taken.
    """
    T = folding_factor
    live = np.zeros(T + 1, dtype=np.int64)
    full = 0
    for e in edges:
        d = e.delay
        if d <= 0:
            continue
        full += d // T
        rem = d % T
        if rem:
            lo = e.producer_cycle % T
            hi = lo + rem
            live[lo] += 1
            if hi <= T:
                live[hi] -= 1
            else:
                live[T] -= 1
                live[0] += 1
                live[hi - T] -= 1
    return int(np.cumsum(live[:T]).max()) + full if T else 0


@dataclass
class Routing:
    """Periodic register allocation and switch settings of a reorder unit.

    ``deliveries[r]`` lists ``(edge_index, source)`` for values handed to
    their consumer in time partition r; ``loads[r]`` lists
    ``(slot, source)`` for register contents at the end of partition r.  A
    source is ``("wire", edge_index)`` (value produced this cycle) or
    ``("reg", slot)`` (register contents from the previous cycle).
    """

    deliveries: list
    loads: list
    slots_used: int


@dataclass
class ReorderUnit:
    name: str
    kind: str
    position: str
    edges: tuple
    folding_factor: int
    # None: one shared register pool; "channel"/"lane": one pool per key
    partition: str | None = None

    def _key(self, edge: FoldedEdge):
        if self.partition == "channel":
            return edge.channel
        if self.partition == "lane":
            return edge.src_wire[-1]
        return None

    @cached_property
    def partition_sizes(self) -> dict:
        groups: dict = {}
        for e in self.edges:
            groups.setdefault(self._key(e), []).append(e)
        sizes = {k: lifetime_analysis(v, self.folding_factor) for k, v in groups.items()}
        return dict(sorted(sizes.items(), key=lambda kv: str(kv[0])))

    @property
    def registers(self) -> int:
        return sum(self.partition_sizes.values())

    @property
    def mux_count(self) -> int:
        return MUX_PER_DSD if self.registers else 0

    @property
    def max_delay(self) -> int:
        return max((e.delay for e in self.edges), default=0)

    @cached_property
    def routing(self) -> Routing:
        T = self.folding_factor
        base = {}
        offset = 0
        for key, size in self.partition_sizes.items():
            base[key] = offset
            offset += size
        live: list[list] = [[] for _ in range(T)]
        for i, e in enumerate(self.edges):
            for age in range(e.delay):
                live[(e.producer_cycle + age) % T].append((i, age))
        alloc: list[dict] = [dict() for _ in range(T)]
        for r in range(T):
            prev = alloc[r - 1] if r else {}
            cur = alloc[r]
            taken: set = set()
            for inst in live[r]:
                i, age = inst
                slot = prev.get((i, age - 1)) if age else None
                if slot is not None:
                    cur[inst] = slot
                    taken.add(slot)
            for inst in live[r]:
                if inst in cur:
                    continue
                key = self._key(self.edges[inst[0]])
                slot = base[key]
                while slot in taken:
                    slot += 1
                if slot >= base[key] + self.partition_sizes[key]:
                    raise AssertionError(f"{self.name}: register pool {key!r} overflow")
                cur[inst] = slot
                taken.add(slot)
        deliveries: list[list] = [[] for _ in range(T)]
        loads: list[list] = [[] for _ in range(T)]
        for i, e in enumerate(self.edges):
            r = e.consumer_cycle % T
            if e.delay == 0:
                deliveries[r].append((i, ("wire", i)))
            else:
                deliveries[r].append((i, ("reg", alloc[(r - 1) % T][(i, e.delay - 1)])))
        for r in range(T):
            for (i, age), slot in alloc[r].items():
                src = ("wire", i) if age == 0 else ("reg", alloc[(r - 1) % T][(i, age - 1)])
                loads[r].append((slot, src))
        used = len({s for a in alloc for s in a.values()})
        return Routing(deliveries, loads, used)

    def switch_schedule(self) -> list[list[tuple]]:
        """Per time partition, the (destination, source) settings of the switch."""
        out = []
        rt = self.routing
        for r in range(self.folding_factor):
            settings = [(self.edges[i].dst_wire, src) for i, src in rt.deliveries[r]]
            settings += [(("reg", slot), src) for slot, src in rt.loads[r]]
            out.append(settings)
        return out

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "position": self.position,
            "registers": self.registers,
            "register_sets": {str(k): v for k, v in self.partition_sizes.items()},
            "mux": self.mux_count,
            "switch_period": self.folding_factor,
            "edges": [
                {
                    "from": e.producer, "from_port": e.producer_port, "from_cycle": e.producer_cycle,
                    "to": e.consumer, "to_port": e.consumer_port, "to_cycle": e.consumer_cycle,
                    "delay": e.delay,
                }
                for e in self.edges
            ],
        }


class ReocBuffer(ReorderUnit):
    """Reorder buffer between FFT and IFFT: two register sets, four MUXes."""

    @property
    def register_sets(self) -> tuple[int, int]:
        sizes = self.partition_sizes
        return (sizes.get(0, 0), sizes.get(1, 0))

    @property
    def mux_count(self) -> int:
        return MUX_PER_REOC


class LaneSteering(ReorderUnit):
    """Register-free de-/re-interleaving stage of the naive interleaved cascade."""

    @property
    def registers(self) -> int:
        return 0

    @property
    def mux_count(self) -> int:
        return MUX_PER_LANE_STEERING


@dataclass(frozen=True)
class BFUnit:
    tag: str
    stage: int

    @property
    def name(self) -> str:
        return f"{self.tag}.BF{stage_letter(self.stage)}"


@dataclass
class TransformPart:
    tag: str
    graph: FlowGraph
    schedule: Schedule


@dataclass
class ArchNetlist:
    name: str
    n_points: int
    folding_factor: int
    channels: tuple
    parts: list
    # reorder units in datapath order (index 0 feeds the first stage)
    units: list
    bfs: list
    multiplier: bool = False
    reoc: ReocBuffer | None = None
    extra_units: list = field(default_factory=list)
    lanes: int = 2
    # (tag, stage, node index) -> extra factor on that butterfly's twiddle
    twiddle_override: dict = field(default_factory=dict)

    @property
    def interleaved(self) -> bool:
        return self.channels == INTERLEAVED

    @property
    def dsds(self) -> list:
        return [u for u in self.units if u.registers and not isinstance(u, ReocBuffer)]

    def all_units(self) -> list:
        return list(self.units) + list(self.extra_units)

    @property
    def input_edges(self) -> list:
        return [e for e in self.units[0].edges]

    @property
    def output_edges(self) -> list:
        return [e for e in self.units[-1].edges]

    def output_slots(self) -> list[tuple]:
        """(cycle, lane, channel, natural index) of every output of frame 0."""
        return sorted(
            (e.consumer_cycle, e.dst_wire[1], e.channel, int(e.consumer.split("[")[1][:-1]))
            for e in self.output_edges
        )

    def input_slots(self) -> list[tuple]:
        return sorted(
            (e.producer_cycle, e.src_wire[1], e.channel, int(e.producer.split("[")[1][:-1]))
            for e in self.input_edges
        )

    @property
    def frame_period(self) -> int:
        return self.folding_factor

    def structural_latency(self) -> int:
        first_in = min(s[0] for s in self.input_slots())
        first_out = min(s[0] for s in self.output_slots())
        return first_out - first_in

    def folded_edges(self) -> list:
        return [e for u in self.units for e in u.edges]

    def to_json(self) -> str:
        doc = {
            "format": NETLIST_FORMAT,
            "name": self.name,
            "n_points": self.n_points,
            "folding_factor": self.folding_factor,
            "lanes": self.lanes,
            "channels": [c for c in self.channels if c],
            "butterflies": [b.name for b in self.bfs],
            "pointwise_multiplier": self.multiplier,
            "reoc": None if self.reoc is None else {
                "register_sets": list(self.reoc.register_sets), "mux": self.reoc.mux_count},
            "units": [u.to_dict() for u in self.all_units()],
            "mux_calibration": MUX_CALIBRATION_NOTE,
        }
        return json.dumps(doc)


def _terminal(kind: str, index: int, channel) -> str:
    prefix = f"{channel}:" if channel else ""
    return f"{prefix}{kind}[{index}]"


def fold(graph: FlowGraph, schedule: Schedule, tag: str | None = None) -> ArchNetlist:
    """Map every edge of *graph* onto the datapath defined by *schedule*.

    Raises :class:`NegativeDelay` for infeasible schedules; nothing is
    retimed.
    """
    if graph.n_points != schedule.n_points or graph.direction != schedule.direction:
        raise ValueError("graph and schedule describe different transforms")
    try:
        check_schedule(schedule, graph)
    except ValueError as exc:
        if "before its inputs" not in str(exc):
            raise
    tag = tag or ("fft" if graph.direction == FORWARD else "ifft")
    n, N, T = graph.n_stages, graph.n_points, schedule.folding_factor
    start = schedule.start
    boundaries: list[list[FoldedEdge]] = [[] for _ in range(n + 1)]
    out_times = {}
    for ch in schedule.channels:
        for e in graph.edges:
            if e.src[0] == "in":
                p_cycle, lane = schedule.input_times[(ch, e.src[1])]
                producer = _terminal("in", graph.input_permutation[e.src[1]], ch)
                src_wire = ("in", lane)
                b = 0
            else:
                s, i = e.src
                p_cycle = start[(ch, s, i)]
                producer = node_label(s, i, ch)
                src_wire = ("bfout", tag, s, e.src_port)
                b = s + 1
            if e.dst[0] == "out":
                out_times[(ch, e.position)] = (p_cycle, e.src_port, producer, src_wire)
                continue
            s, i = e.dst
            fe = FoldedEdge(producer, e.src_port, p_cycle, node_label(s, i, ch), e.dst_port,
                            start[(ch, s, i)], ch, src_wire, ("bfin", tag, s, e.dst_port))
            if fe.delay < 0:
                raise NegativeDelay(fe)
            boundaries[b].append(fe)

    # output boundary
    commutate = schedule.interleaved and graph.direction == INVERSE
    if commutate:
        # back to one channel per lane: channel X leaves serially on lane 0
        # starting at s0, channel Y on lane 1 starting at s0 + N/2; each
        # stream carries the upper-lane values in production order followed
        # by the lower-lane values
        emit = {}
        for ch in schedule.channels:
            mine = sorted((k for k in out_times if k[0] == ch), key=lambda k: (out_times[k][1], out_times[k][0]))
            for r, k in enumerate(mine):
                emit[k] = ((0 if ch == "X" else N // 2) + r, 0 if ch == "X" else 1)
        s0 = max(out_times[k][0] - emit[k][0] for k in out_times)
    for (ch, pos), (c, port, producer, src_wire) in sorted(out_times.items(), key=lambda kv: kv[1][0]):
        j = graph.output_permutation[pos]
        if commutate:
            cycle, lane = s0 + emit[(ch, pos)][0], emit[(ch, pos)][1]
        else:
            cycle, lane = c, port
        boundaries[n].append(FoldedEdge(producer, port, c, _terminal("out", j, ch), 0, cycle, ch,
                                        src_wire, ("out", lane)))

    units = []
    first_kind = "commutator" if graph.direction == FORWARD else "input"
    first_part = "channel" if (schedule.interleaved and graph.direction == FORWARD) else None
    units.append(synthesize_dsd(boundaries[0], T, name=f"{tag}.in", kind=first_kind,
                                position="input", partition=first_part))
    for b in range(1, n):
        units.append(synthesize_dsd(boundaries[b], T, name=f"{tag}.DSD{b}",
                                    kind="dsd", position=f"{stage_letter(b - 1)}->{stage_letter(b)}"))
    units.append(synthesize_dsd(boundaries[n], T, name=f"{tag}.out",
                                kind="output-commutator" if commutate else "wire",
                                position="output", partition="channel" if commutate else None))
    bfs = [BFUnit(tag, s) for s in range(n)]
    return ArchNetlist(f"{tag}-{schedule.name}", N, T, schedule.channels,
                       [TransformPart(tag, graph, schedule)], units, bfs)


def synthesize_dsd(edges, folding_factor: int, name: str = "dsd", kind: str = "dsd",
                   position: str = "", partition: str | None = None, cls=ReorderUnit) -> ReorderUnit:
    """Reorder unit realizing *edges* with the lifetime-minimum register count."""
    edges = tuple(edges)
    for e in edges:
        if e.delay < 0:
            raise NegativeDelay(e)
    unit = cls(name, kind, position, edges, folding_factor, partition)
    return unit


def _rewire(edge: FoldedEdge, src_wire: tuple) -> FoldedEdge:
    return FoldedEdge(edge.producer, edge.producer_port, edge.producer_cycle, edge.consumer,
                      edge.consumer_port, edge.consumer_cycle, edge.channel, src_wire, edge.dst_wire)


def cascade(fft: ArchNetlist, ifft: ArchNetlist, reoc: bool, name: str | None = None) -> ArchNetlist:
    """Join an FFT and an IFFT netlist through a pointwise multiplier.

    With ``reoc=True`` the IFFT's input edge set is realized as a reorder
    buffer; otherwise the FFT outputs must feed the IFFT with no storage.
    """
    if fft.folding_factor != ifft.folding_factor or fft.channels != ifft.channels \
            or fft.n_points != ifft.n_points:
        raise ValueError("lane-rate mismatch between FFT and IFFT netlists")
    if len(fft.parts) != 1 or len(ifft.parts) != 1:
        raise ValueError("cascade expects single-transform netlists")
    n = fft.parts[0].graph.n_stages
    last = n - 1
    fft_tag, ifft_tag = fft.parts[0].tag, ifft.parts[0].tag
    # FFT results leave the last forward PE on port == lane
    edges = [_rewire(e, ("bfout", fft_tag, last, e.src_wire[1])) for e in ifft.units[0].edges]
    T = fft.folding_factor
    if reoc:
        bridge = synthesize_dsd(edges, T, name="REOC", kind="reoc", position="FFT->IFFT",
                                partition="lane", cls=ReocBuffer)
    else:
        bridge = synthesize_dsd(edges, T, name=f"{ifft_tag}.in", kind="wire", position="FFT->IFFT")
        if bridge.registers:
            raise ValueError(
                f"IFFT input needs {bridge.registers} registers of reordering; cascade requires a REOC")
    extra = []
    if ifft.parts[0].schedule.extra_dsd_units:
        extra = [LaneSteering("deinterleave", "deinterleave", "before pointwise multiplier", (), T),
                 LaneSteering("reinterleave", "reinterleave", "after pointwise multiplier", (), T)]
    units = list(fft.units[:-1]) + [bridge] + list(ifft.units[1:])
    return ArchNetlist(
        name or f"{fft.name}+{ifft.name}", fft.n_points, T, fft.channels,
        fft.parts + ifft.parts, units, fft.bfs + ifft.bfs, multiplier=True,
        reoc=bridge if reoc else None, extra_units=extra,
    )


@dataclass
class ResourceReport:
    design: str
    n_points: int
    bf_count: int
    memory_elements: int
    mux_count: int
    fifo_latency: int
    throughput: int = 2
    bf_total: int = 0
    notes: list = field(default_factory=list)

    CSV_HEADER = "design,N,bf,memory,mux,latency,throughput"

    def to_csv_row(self) -> str:
        return (f"{self.design},{self.n_points},{self.bf_count},{self.memory_elements},"
                f"{self.mux_count},{self.fifo_latency},{self.throughput}")


def count_resources(netlist: ArchNetlist, design: str | None = None) -> ResourceReport:
    """Roll up registers, MUXes, butterflies and first-in/first-out latency.

    ``bf_count`` is butterflies per transform (one per stage); the cascade
    total is in ``bf_total``.
    """
    units = netlist.all_units()
    memory = sum(u.registers for u in units)
    mux = sum(u.mux_count for u in units)
    per_transform = len(netlist.bfs) // max(1, len(netlist.parts))
    return ResourceReport(
        design or netlist.name,
        netlist.n_points,
        per_transform,
        memory,
        mux,
        netlist.structural_latency(),
        2,
        len(netlist.bfs),
        [MUX_CALIBRATION_NOTE],
    )


def savings(report_a: ResourceReport, report_b: ResourceReport) -> dict:
    """How much *report_a* saves relative to *report_b* (absolute and percent of b)."""
    out = {}
    for name in ("memory_elements", "fifo_latency", "mux_count", "bf_count"):
        a, b = getattr(report_a, name), getattr(report_b, name)
        out[name] = b - a
        out[f"{name}_pct"] = 100.0 * (b - a) / b if b else 0.0
    return out
