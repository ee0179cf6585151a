"""Radix-2 FFT/IFFT butterfly flow graphs.

The forward graph is the decimation-in-frequency network: natural-order
inputs, bit-reversed outputs, twiddle applied to the lower butterfly
output.  The inverse graph is its transpose with conjugated twiddles,
which turns every butterfly into a decimation-in-time one (twiddle on the
lower input) and swaps the I/O orderings.

Both graphs are drawn on the same set of N *positions*.  A butterfly reads
two positions and writes the same two positions, so edges are implied by
"who last wrote position p".
"""

from __future__ import annotations

import cmath
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

FORWARD = "forward"
INVERSE = "inverse"
GRAPH_FORMAT = "foldfft-graph-v1"


def log2_exact(n_points: int) -> int:
    """Return k with 2**k == n_points, raising ValueError otherwise."""
    if not isinstance(n_points, (int, np.integer)) or isinstance(n_points, bool):
        raise ValueError(f"transform size must be an integer, got {n_points!r}")
    n_points = int(n_points)
    if n_points < 2 or n_points & (n_points - 1):
        raise ValueError(f"transform size must be a power of two >= 2, got {n_points}")
    return n_points.bit_length() - 1


def bit_reverse(value: int, bits: int) -> int:
    out = 0
    for _ in range(bits):
        out = (out << 1) | (value & 1)
        value >>= 1
    return out


def bit_reverse_permutation(n_points: int) -> list[int]:
    """Index map i -> bit reversal of i on log2(n_points) bits."""
    bits = log2_exact(n_points)
    return [bit_reverse(i, bits) for i in range(n_points)]


def twiddle(exponent: int, n_points: int) -> complex:
    """W_N^k = exp(-2j*pi*k/N)."""
    return cmath.exp(-2j * cmath.pi * (exponent % n_points) / n_points)


@dataclass(frozen=True)
class ButterflyNode:
    stage: int
    index: int
    twiddle_exponent: int
    # positions read (and written) by this butterfly: (upper, lower)
    upper: int
    lower: int

    @property
    def key(self) -> tuple[int, int]:
        return (self.stage, self.index)


@dataclass(frozen=True)
class Edge:
    """Connection from a producer port to a consumer port.

    Producers are ``("in", position)`` or ``(stage, index)`` with a port
    number; consumers are ``(stage, index)`` or ``("out", position)``.
    Graph I/O terminals use port 0.
    """

    src: tuple
    src_port: int
    dst: tuple
    dst_port: int
    position: int


@dataclass(frozen=True)
class FlowGraph:
    n_points: int
    direction: str
    nodes: tuple[ButterflyNode, ...]
    # input_permutation[p]: natural index fed to input position p
    input_permutation: tuple[int, ...]
    # output_permutation[p]: natural index held by output position p
    output_permutation: tuple[int, ...]

    @property
    def n_stages(self) -> int:
        return self.n_points.bit_length() - 1

    @cached_property
    def node_map(self) -> dict[tuple[int, int], ButterflyNode]:
        return {node.key: node for node in self.nodes}

    def stage_nodes(self, stage: int) -> list[ButterflyNode]:
        return sorted((n for n in self.nodes if n.stage == stage), key=lambda n: n.index)

    @cached_property
    def rank(self) -> dict[tuple[int, int], int]:
        """Top-to-bottom row order of each butterfly within its stage."""
        out = {}
        for s in range(self.n_stages):
            for r, node in enumerate(sorted(self.stage_nodes(s), key=lambda n: n.upper)):
                out[node.key] = r
        return out

    @cached_property
    def edges(self) -> tuple[Edge, ...]:
        writer: dict[int, tuple[tuple, int]] = {p: (("in", p), 0) for p in range(self.n_points)}
        edges = []
        for s in range(self.n_stages):
            for node in self.stage_nodes(s):
                for port, pos in enumerate((node.upper, node.lower)):
                    src, src_port = writer[pos]
                    edges.append(Edge(src, src_port, node.key, port, pos))
                for port, pos in enumerate((node.upper, node.lower)):
                    writer[pos] = (node.key, port)
        for pos in range(self.n_points):
            src, src_port = writer[pos]
            edges.append(Edge(src, src_port, ("out", pos), 0, pos))
        return tuple(edges)

    def producer_of(self, stage: int, position: int) -> tuple[tuple, int]:
        """Producer (node key or input terminal, port) of *position* entering *stage*."""
        if stage == 0:
            return ("in", position), 0
        for node in self.stage_nodes(stage - 1):
            if position == node.upper:
                return node.key, 0
            if position == node.lower:
                return node.key, 1
        raise KeyError(position)

    def to_json(self) -> str:
        doc = {
            "format": GRAPH_FORMAT,
            "n_points": self.n_points,
            "direction": self.direction,
            "nodes": [
                {
                    "stage": n.stage,
                    "index": n.index,
                    "twiddle_exponent": n.twiddle_exponent,
                    "positions": [n.upper, n.lower],
                }
                for n in self.nodes
            ],
            "edges": [
                {"src": list(e.src), "src_port": e.src_port, "dst": list(e.dst), "dst_port": e.dst_port}
                for e in self.edges
            ],
            "input_permutation": list(self.input_permutation),
            "output_permutation": list(self.output_permutation),
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "FlowGraph":
        doc = json.loads(text)
        if doc.get("format") != GRAPH_FORMAT:
            raise ValueError(f"unsupported graph format {doc.get('format')!r}")
        nodes = tuple(
            ButterflyNode(n["stage"], n["index"], n["twiddle_exponent"], *n["positions"])
            for n in doc["nodes"]
        )
        return cls(
            doc["n_points"],
            doc["direction"],
            nodes,
            tuple(doc["input_permutation"]),
            tuple(doc["output_permutation"]),
        )


def build_fft_flowgraph(n_points: int) -> FlowGraph:
    """Radix-2 DIF graph.

    Stage s pairs positions t*B + j and t*B + j + B/2 (B = N / 2**s); node
    index is t*B/2 + j and the lower output is rotated by W_N^(j * 2**s).
    """
    n = log2_exact(n_points)
    nodes = []
    for s in range(n):
        block = n_points >> s
        half = block // 2
        for t in range(n_points // block):
            for j in range(half):
                nodes.append(ButterflyNode(s, t * half + j, j << s, t * block + j, t * block + j + half))
    rev = bit_reverse_permutation(n_points)
    return FlowGraph(n_points, FORWARD, tuple(nodes), tuple(range(n_points)), tuple(rev))


def build_ifft_flowgraph(n_points: int) -> FlowGraph:
    """Transpose of :func:`build_fft_flowgraph` with conjugated twiddles.

    Forward stage sigma becomes inverse stage n-1-sigma and keeps its two
    positions.  The inverse node label is the bit reversal (on n-1 bits) of
    the forward node index, so stage A butterfly A_k combines bins k and
    k + N/2 and the labels read in the same order as the forward graph.
    1/N scaling is attached to the final stage.
    """
    n = log2_exact(n_points)
    fwd = build_fft_flowgraph(n_points)
    nodes = []
    for node in fwd.nodes:
        nodes.append(
            ButterflyNode(
                n - 1 - node.stage,
                bit_reverse(node.index, n - 1),
                (-node.twiddle_exponent) % n_points,
                node.upper,
                node.lower,
            )
        )
    nodes.sort(key=lambda x: (x.stage, x.index))
    rev = bit_reverse_permutation(n_points)
    return FlowGraph(n_points, INVERSE, tuple(nodes), tuple(rev), tuple(range(n_points)))


def butterfly(graph: FlowGraph, node: ButterflyNode, a: complex, b: complex) -> tuple[complex, complex]:
    w = twiddle(node.twiddle_exponent, graph.n_points)
    if graph.direction == FORWARD:
        return a + b, (a - b) * w
    b = b * w
    return a + b, a - b


def evaluate_flowgraph(graph: FlowGraph, frame) -> np.ndarray:
    """Run *frame* (natural order) through the graph.

    Returns values in the graph's output-position order; position p holds
    natural index ``graph.output_permutation[p]``.
    """
    frame = np.asarray(frame, dtype=complex)
    if frame.shape != (graph.n_points,):
        raise ValueError(f"frame length {frame.shape} does not match N={graph.n_points}")
    values = frame[list(graph.input_permutation)].copy()
    for s in range(graph.n_stages):
        for node in graph.stage_nodes(s):
            values[node.upper], values[node.lower] = butterfly(
                graph, node, values[node.upper], values[node.lower]
            )
    if graph.direction == INVERSE:
        values /= graph.n_points
    return values


def to_natural(graph: FlowGraph, values) -> np.ndarray:
    """Reorder output-position values into natural index order."""
    values = np.asarray(values)
    out = np.empty_like(values)
    out[list(graph.output_permutation)] = values
    return out
