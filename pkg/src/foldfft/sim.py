"""Cycle-accurate simulation of folded netlists.

A netlist is compiled into one short instruction list per time partition
(cycle mod T): read the input lanes, then for each stage the reorder-unit
switch settings followed by the butterfly, the pointwise multiply after the
last forward stage, output capture, and finally the register updates.  The
program runs on a compiled kernel when it is available and on a pure-Python
one otherwise; set ``FOLDFFT_PURE_PYTHON=1`` to force the latter.

All state starts as NaN and idle input slots carry NaN, so an output is
finite only if every value it depends on came from a real input sample.
The first finite output therefore marks the end of the pipeline latency.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field

import numpy as np

from . import _pykernel
from .flowgraph import INVERSE, twiddle
from .folding import ArchNetlist

try:
    from ._kernel import run_program as _compiled_run
except ImportError:  # extension not built
    _compiled_run = None

OP_IN, OP_MOVE, OP_DIF, OP_DIT, OP_MUL, OP_OUT = range(6)


def available_backends() -> list[str]:
    return (["cython"] if _compiled_run is not None else []) + ["python"]


def default_backend() -> str:
    if _compiled_run is None or os.environ.get("FOLDFFT_PURE_PYTHON", "") not in ("", "0"):
        return "python"
    return "cython"


BACKEND = default_backend()


@dataclass
class Program:
    code: np.ndarray
    offsets: np.ndarray
    consts: np.ndarray
    state_size: int
    reg_lo: int
    reg_hi: int
    period: int
    wires: dict


def _channel_index(netlist: ArchNetlist, ch) -> int:
    return 0 if ch is None else netlist.channels.index(ch)


def compile_program(netlist: ArchNetlist, H=None) -> Program:
    """Translate *netlist* (and multiplier coefficients *H*) into kernel code.

    *H* holds the pointwise multiplier coefficients in natural bin order,
    one row per channel (a single row is broadcast).  Ignored when the
    netlist has no multiplier.
    """
    T = netlist.folding_factor
    N = netlist.n_points
    wires: dict = {}

    def w(name):
        if name not in wires:
            wires[name] = len(wires)
        return wires[name]

    for lane in range(netlist.lanes):
        w(("in", lane))
        w(("out", lane))
    for part in netlist.parts:
        for s in range(part.graph.n_stages):
            for port in (0, 1):
                w(("bfin", part.tag, s, port))
                w(("bfout", part.tag, s, port))
    n_wires = len(wires)
    units = netlist.units
    reg_base = []
    total = 0
    for u in units:
        reg_base.append(n_wires + total)
        total += u.registers
    reg_lo, reg_hi = n_wires, n_wires + total
    next_of = total  # next-state copy sits right after the registers

    consts: list[complex] = [1.0]
    const_ix: dict = {}

    def k(value) -> int:
        key = complex(value)
        if key not in const_ix:
            const_ix[key] = len(consts)
            consts.append(key)
        return const_ix[key]

    def kpair(a, b) -> int:
        consts.extend([complex(a), complex(b)])
        return len(consts) - 2

    if netlist.multiplier:
        H = np.ones((len(netlist.channels), N), complex) if H is None else np.asarray(H, complex)
        if H.ndim == 1:
            H = np.broadcast_to(H, (len(netlist.channels), N))
        if H.shape != (len(netlist.channels), N):
            raise ValueError(f"multiplier coefficients must have shape ({len(netlist.channels)}, {N})")

    progs: list[list] = [[] for _ in range(T)]
    loads: list[list] = [[] for _ in range(T)]
    commits: list[list] = [[] for _ in range(T)]
    for r in range(T):
        for lane in range(netlist.lanes):
            progs[r].append((OP_IN, w(("in", lane)), lane, 0, 0, 0))

    def emit_unit(ui):
        u = units[ui]
        if not u.edges:
            return
        rt = u.routing
        base = reg_base[ui]
        for r in range(T):
            targets = [u.edges[i].dst_wire for i, _ in rt.deliveries[r]]
            if len(set(targets)) != len(targets):
                raise AssertionError(f"{u.name}: lane overrun in time partition {r}")
            for i, (kind, v) in rt.deliveries[r]:
                e = u.edges[i]
                src = wires[e.src_wire] if kind == "wire" else base + v
                progs[r].append((OP_MOVE, w(e.dst_wire), src, 0, 0, 0))
            for slot, (kind, v) in rt.loads[r]:
                src = wires[u.edges[v].src_wire] if kind == "wire" else base + v
                loads[r].append(base + slot + next_of)
                loads[r].append(src)
                commits[r].append(base + slot)

    ui = 0
    for part in netlist.parts:
        graph, sched = part.graph, part.schedule
        last = graph.n_stages - 1
        for s in range(graph.n_stages):
            emit_unit(ui)
            ui += 1
            for node in graph.stage_nodes(s):
                for ch in sched.channels:
                    c = sched.start[(ch, s, node.index)]
                    wv = twiddle(node.twiddle_exponent, N)
                    wv *= netlist.twiddle_override.get((part.tag, s, node.index), 1.0)
                    a, b = w(("bfin", part.tag, s, 0)), w(("bfin", part.tag, s, 1))
                    c0, c1 = w(("bfout", part.tag, s, 0)), w(("bfout", part.tag, s, 1))
                    if graph.direction == INVERSE:
                        scale = 1.0 / N if s == last else 1.0
                        progs[c % T].append((OP_DIT, a, b, c0, c1, kpair(wv, scale)))
                    else:
                        progs[c % T].append((OP_DIF, a, b, c0, c1, k(wv)))
                    if s == last and netlist.multiplier and graph.direction != INVERSE:
                        chi = _channel_index(netlist, ch)
                        for port, pos in enumerate((node.upper, node.lower)):
                            bin_ = graph.output_permutation[pos]
                            progs[c % T].append((OP_MUL, w(("bfout", part.tag, s, port)), 0, 0, 0,
                                                 k(H[chi, bin_])))
    emit_unit(ui)
    out_unit = units[ui]
    for r in range(T):
        lanes_hit = sorted({out_unit.edges[i].dst_wire[1] for i, _ in out_unit.routing.deliveries[r]})
        for lane in lanes_hit:
            progs[r].append((OP_OUT, w(("out", lane)), lane, 0, 0, 0))
        # register inputs are captured first, then all registers update together
        pairs = loads[r]
        progs[r].extend((OP_MOVE, pairs[i], pairs[i + 1], 0, 0, 0) for i in range(0, len(pairs), 2))
        progs[r].extend((OP_MOVE, dst, dst + next_of, 0, 0, 0) for dst in commits[r])

    rows = [row for p in progs for row in p]
    offsets = np.cumsum([0] + [len(p) for p in progs]).astype(np.intc)
    code = np.asarray(rows, dtype=np.intc).reshape(-1, 6)
    return Program(np.ascontiguousarray(code), offsets, np.asarray(consts, complex),
                   reg_hi + total, reg_lo, reg_hi, T, wires)


@dataclass
class Trace:
    """Cycle-by-cycle record of one simulation run.

    ``inputs``/``outputs`` have one row per cycle and one column per lane;
    ``valid`` marks finite outputs.  ``frames`` holds the outputs of each
    input frame in natural index order (shape ``(F, N)``, or ``(F, 2, N)``
    for two channels).  ``registers`` (cycles x registers) is filled only
    when snapshots are requested; ``register_units`` names the unit owning
    each register column.
    """

    netlist_name: str
    backend: str
    period: int
    inputs: np.ndarray
    outputs: np.ndarray
    valid: np.ndarray
    frames: np.ndarray
    registers: np.ndarray | None = None
    register_units: list = field(default_factory=list)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    def samples(self):
        """Yield ``(cycle, unit, lane, value)`` for every finite lane value."""
        for name, arr in (("input", self.inputs), ("output", self.outputs)):
            for t, lane in zip(*np.nonzero(np.isfinite(arr))):
                yield int(t), name, int(lane), complex(arr[t, lane])
        if self.registers is not None:
            for t, col in zip(*np.nonzero(np.isfinite(self.registers))):
                yield int(t), self.register_units[col], int(col), complex(self.registers[t, col])

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["cycle", "unit", "lane", "value"])
        for t, unit, lane, v in sorted(self.samples(), key=lambda r: (r[0], r[1], r[2])):
            wr.writerow([t, unit, lane, f"{v.real:.17g}{v.imag:+.17g}j"])
        return buf.getvalue()

    def to_vcd(self) -> str:
        """VCD-style text dump: lane values listed only where they change."""
        lines = [f"$comment {self.netlist_name} backend={self.backend} $end",
                 "$timescale 1 cycle $end"]
        signals = [("input", l) for l in range(self.inputs.shape[1])]
        signals += [("output", l) for l in range(self.outputs.shape[1])]
        for i, (unit, lane) in enumerate(signals):
            lines.append(f"$var wire 128 s{i} {unit}{lane} $end")
        lines.append("$enddefinitions $end")
        prev = [None] * len(signals)
        for t in range(self.inputs.shape[0]):
            changes = []
            for i, (unit, lane) in enumerate(signals):
                v = (self.inputs if unit == "input" else self.outputs)[t, lane]
                txt = "x" if not np.isfinite(v) else f"{v.real:.6g}{v.imag:+.6g}j"
                if txt != prev[i]:
                    changes.append(f"r{txt} s{i}")
                    prev[i] = txt
            if changes:
                lines.append(f"#{t}")
                lines.extend(changes)
        return "\n".join(lines) + "\n"


def _as_frames(netlist: ArchNetlist, frames, channels=None) -> np.ndarray:
    x = np.asarray(frames, dtype=complex)
    C, N = len(netlist.channels), netlist.n_points
    if channels is not None:
        # flat list of frames tagged X, Y, X, Y, ...
        tags = list(channels)
        if C == 1 or x.ndim != 2 or len(tags) != x.shape[0] or len(tags) % 2:
            raise ValueError("channel tags need an interleaved netlist and one tag per frame, in pairs")
        if tags != list(netlist.channels) * (len(tags) // 2):
            raise ValueError("interleaved frames must alternate X, Y")
        x = x.reshape(-1, 2, x.shape[-1])
    if C == 1 and x.ndim < 3:
        x = x.reshape(-1, 1, x.shape[-1])
    elif x.ndim == 2:
        x = x[None]
    if x.ndim != 3 or x.shape[1:] != (C, N) or x.shape[0] < 1:
        raise ValueError(f"expected frames of shape (F, {C}, {N})" if C > 1 else f"expected frames of length {N}")
    return x


def _runner(backend: str):
    if backend == "cython":
        if _compiled_run is None:
            raise RuntimeError("compiled kernel is not available")
        return _compiled_run
    if backend == "python":
        return _pykernel.run_program
    raise ValueError(f"unknown backend {backend!r}")


def simulate(netlist: ArchNetlist, frames, channels=None, H=None, backend: str | None = None,
             snapshots: bool = False) -> Trace:
    """Stream *frames* through *netlist* back to back, one frame per T cycles.

    *frames* is ``(F, N)`` for single-channel netlists and ``(F, 2, N)``
    for interleaved ones; alternatively pass a flat ``(2F, N)`` list with
    *channels* tagging each frame ``"X"``/``"Y"`` alternately.
    """
    x = _as_frames(netlist, frames, channels)
    F = x.shape[0]
    T = netlist.folding_factor
    prog = compile_program(netlist, H)
    in_slots = netlist.input_slots()
    out_slots = netlist.output_slots()
    n_cycles = (F - 1) * T + max(s[0] for s in out_slots) + 1
    inp = np.full((n_cycles, netlist.lanes), np.nan + 0j)
    for f in range(F):
        for cycle, lane, ch, idx in in_slots:
            inp[cycle + f * T, lane] = x[f, _channel_index(netlist, ch), idx]
    out = np.full((n_cycles, netlist.lanes), np.nan + 0j)
    state = np.full(prog.state_size, np.nan + 0j)
    snaps = np.zeros((n_cycles if snapshots else 0, prog.reg_hi - prog.reg_lo), complex)
    backend = backend or default_backend()
    _runner(backend)(prog.code, prog.offsets, prog.consts, state, inp, out, T, n_cycles,
                     prog.reg_lo, prog.reg_hi, snaps)
    res = np.empty_like(x)
    for f in range(F):
        for cycle, lane, ch, idx in out_slots:
            res[f, _channel_index(netlist, ch), idx] = out[cycle + f * T, lane]
    if len(netlist.channels) == 1:
        res = res[:, 0, :]
    owners = [u.name for u in netlist.units for _ in range(u.registers)]
    return Trace(netlist.name, backend, T, inp, out, np.isfinite(out), res,
                 snaps if snapshots else None, owners)


def reference_cascade(x, H=None) -> np.ndarray:
    """IFFT(H * FFT(x)) along the last axis, computed with numpy."""
    x = np.asarray(x, dtype=complex)
    X = np.fft.fft(x, axis=-1)
    if H is not None:
        X = X * np.asarray(H, complex)
    return np.fft.ifft(X, axis=-1)


def run_cascade(netlist: ArchNetlist, x, H=None, backend: str | None = None) -> np.ndarray:
    """Cascade outputs for frame(s) *x* in natural order.

    *H* is given in natural bin order; the simulator routes each
    coefficient to the cycle at which its bin leaves the forward transform.
    """
    if not netlist.multiplier:
        raise ValueError("netlist has no pointwise multiplier; use simulate()")
    x = np.asarray(x, dtype=complex)
    if x.shape[-1] != netlist.n_points:
        raise ValueError(f"frame length {x.shape[-1]} does not match N={netlist.n_points}")
    if H is not None and np.shape(H)[-1] != netlist.n_points:
        raise ValueError(f"H length {np.shape(H)[-1]} does not match N={netlist.n_points}")
    single = x.ndim == (1 if len(netlist.channels) == 1 else 2)
    y = simulate(netlist, x, H=H, backend=backend).frames
    return y[0] if single else y


def measure_latency(trace: Trace) -> int:
    """Cycles from the first input sample to the first valid output."""
    got_in = np.flatnonzero(np.isfinite(trace.inputs).any(axis=1))
    got_out = np.flatnonzero(trace.valid.any(axis=1))
    if not got_in.size or not got_out.size:
        raise ValueError("trace has no valid input or output")
    return int(got_out[0] - got_in[0])


def measure_throughput(trace: Trace) -> float:
    """Valid output samples per cycle over whole steady-state frame periods.

    Needs at least 3 frames.  The window runs from the first cycle at which
    every lane carries a valid output for an integer number of frame
    periods inside the run.
    """
    if trace.n_frames < 3:
        raise ValueError("throughput needs at least 3 back-to-back frames")
    full = np.flatnonzero(trace.valid.all(axis=1))
    if not full.size:
        return 0.0
    span = full[-1] + 1 - full[0]
    periods = span // trace.period
    if periods < 1:
        return 0.0
    window = trace.valid[full[0]:full[0] + periods * trace.period]
    return float(window.sum()) / window.shape[0]
