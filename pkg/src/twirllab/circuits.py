"""Connectivity graphs, brickwork circuit ensembles, and superblock layouts.

A circuit ensemble is described declaratively (architecture + layers of
bricks + optional mixture weights over alternative layouts) and sampled
into concrete gate lists.  Gates are stored in structured form (tableau,
Majorana rotation) whenever the group admits one, with dense matrices as
the common fallback.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .operators import DenseOperator
from .samplers import (
    CliffordTableau,
    MajoranaRotation,
    SymplecticForm,
    clifford_to_dense,
    haar_orthogonal,
    haar_unitary,
    haar_symplectic,
    random_clifford,
    random_matchgate,
)
from .streams import RngStream

GROUP_TAGS = ("U", "O", "Sp", "Cl", "M")


class InvalidCircuitSpec(ValueError):
    pass


@dataclass(frozen=True)
class ArchitectureGraph:
    """Undirected connectivity graph on qubits 0..n-1."""

    n: int
    edges: tuple

    def __post_init__(self):
        norm = tuple(sorted(tuple(sorted(e)) for e in self.edges))
        object.__setattr__(self, "edges", norm)
        for a, b in norm:
            if not (0 <= a < self.n and 0 <= b < self.n) or a == b:
                raise InvalidCircuitSpec(f"bad edge ({a},{b}) for n={self.n}")
        if self.n > 1 and len(self._bfs(0)) != self.n:
            raise InvalidCircuitSpec("architecture graph is not connected")

    @classmethod
    def line(cls, n: int) -> "ArchitectureGraph":
        return cls(n, tuple((i, i + 1) for i in range(n - 1)))

    @classmethod
    def all_to_all(cls, n: int) -> "ArchitectureGraph":
        return cls(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))

    def neighbors(self, q: int):
        out = []
        for a, b in self.edges:
            if a == q:
                out.append(b)
            elif b == q:
                out.append(a)
        return out

    def _bfs(self, start: int) -> dict:
        dist = {start: 0}
        queue = deque([start])
        while queue:
            q = queue.popleft()
            for r in self.neighbors(q):
                if r not in dist:
                    dist[r] = dist[q] + 1
                    queue.append(r)
        return dist

    @property
    def diameter(self) -> int:
        best = 0
        for q in range(self.n):
            best = max(best, max(self._bfs(q).values()))
        return best

    def is_connected_set(self, qubits: Sequence[int]) -> bool:
        qs = set(qubits)
        if not qs:
            return True
        seen = {min(qs)}
        queue = deque(seen)
        while queue:
            q = queue.popleft()
            for r in self.neighbors(q):
                if r in qs and r not in seen:
                    seen.add(r)
                    queue.append(r)
        return seen == qs


@dataclass(frozen=True)
class BrickSpec:
    """One brick: a small-support gate slot inside a layer."""

    layer: int
    support: tuple
    group: str
    identity: bool = False  # identity bricks occupy qubits but draw no gate

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(int(q) for q in self.support))
        if self.group not in GROUP_TAGS:
            raise InvalidCircuitSpec(f"unknown group tag {self.group!r}")
        if len(set(self.support)) != len(self.support) or not self.support:
            raise InvalidCircuitSpec("brick support must be a nonempty set")
        if self.group == "Sp" and not self.identity and len(self.support) % 2 == 0:
            raise InvalidCircuitSpec("symplectic bricks need odd arity")
        if self.group == "M" and not self.identity:
            lo, hi = min(self.support), max(self.support)
            if sorted(self.support) != list(range(lo, hi + 1)):
                raise InvalidCircuitSpec("matchgate bricks must be intervals")


Layout = tuple  # tuple of layers; each layer is a tuple of BrickSpec


@dataclass(frozen=True)
class CircuitSpec:
    """An ensemble: mixture over fixed brickwork layouts with Haar bricks."""

    architecture: ArchitectureGraph
    layouts: tuple
    weights: Optional[tuple] = None

    def __post_init__(self):
        if not self.layouts:
            raise InvalidCircuitSpec("need at least one layout")
        if self.weights is None and len(self.layouts) > 1:
            object.__setattr__(
                self, "weights", tuple(1.0 / len(self.layouts) for _ in self.layouts)
            )
        if self.weights is not None:
            if len(self.weights) != len(self.layouts):
                raise InvalidCircuitSpec("one weight per layout")
            if abs(sum(self.weights) - 1.0) > 1e-9:
                raise InvalidCircuitSpec("mixture weights must sum to 1")
        arities = set()
        for layout in self.layouts:
            for li, layer in enumerate(layout):
                seen = set()
                for brick in layer:
                    if brick.layer != li:
                        raise InvalidCircuitSpec("brick layer index mismatch")
                    if seen & set(brick.support):
                        raise InvalidCircuitSpec("bricks overlap within a layer")
                    seen |= set(brick.support)
                    if not self.architecture.is_connected_set(brick.support):
                        raise InvalidCircuitSpec("brick support not connected")
                    if not brick.identity:
                        arities.add(len(brick.support))
        if len(arities) > 1:
            raise InvalidCircuitSpec(f"brick arity must be constant, got {arities}")

    @property
    def n(self) -> int:
        return self.architecture.n

    @property
    def depth(self) -> int:
        return max(len(layout) for layout in self.layouts)

    @property
    def layers(self) -> tuple:
        """Layers of the unique layout (mixtures have no single gate list)."""
        if len(self.layouts) != 1:
            raise InvalidCircuitSpec("mixture spec has no unique layout")
        return self.layouts[0]

    # ---- declarative round-trip -------------------------------------

    def to_json(self) -> str:
        doc = {
            "format": "circuit-spec",
            "version": 1,
            "n": self.architecture.n,
            "edges": [list(e) for e in self.architecture.edges],
            "layouts": [
                [
                    [
                        {
                            "layer": b.layer,
                            "support": list(b.support),
                            "group": b.group,
                            "identity": b.identity,
                        }
                        for b in layer
                    ]
                    for layer in layout
                ]
                for layout in self.layouts
            ],
            "weights": list(self.weights) if self.weights is not None else None,
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "CircuitSpec":
        doc = json.loads(text)
        if doc.get("format") != "circuit-spec" or doc.get("version") != 1:
            raise InvalidCircuitSpec("unrecognized circuit-spec document")
        arch = ArchitectureGraph(doc["n"], tuple(tuple(e) for e in doc["edges"]))
        layouts = tuple(
            tuple(
                tuple(
                    BrickSpec(b["layer"], tuple(b["support"]), b["group"], b["identity"])
                    for b in layer
                )
                for layer in layout
            )
            for layout in doc["layouts"]
        )
        weights = tuple(doc["weights"]) if doc.get("weights") is not None else None
        return cls(arch, layouts, weights)


@dataclass(frozen=True)
class SuperblockSpec:
    """Two staggered layers of big blocks on patches of xi qubits."""

    n: int
    xi: int
    group: str

    def __post_init__(self):
        if self.n % self.xi != 0:
            raise InvalidCircuitSpec("patch size must divide n")
        if self.m % 2 != 0:
            raise InvalidCircuitSpec("patch count must be even")
        if self.group not in GROUP_TAGS:
            raise InvalidCircuitSpec(f"unknown group tag {self.group!r}")

    @property
    def m(self) -> int:
        return self.n // self.xi


def _patch(spec: SuperblockSpec, p: int) -> tuple:
    p %= spec.m
    return tuple(range(p * spec.xi, (p + 1) * spec.xi))


def build_superblock(spec: SuperblockSpec) -> CircuitSpec:
    """Layer 1 glues patches (0,1),(2,3),...; layer 2 glues (1,2),...,(m-1,0).

    The second layer wraps around the patch ring.  Matchgate blocks can
    only sit on intervals, so for that group the wraparound block is
    dropped (open-boundary variant); this deviation is visible in the
    returned spec.
    """
    arch = ArchitectureGraph.all_to_all(spec.n) if spec.n > 1 else ArchitectureGraph(1, ())
    layer1 = tuple(
        BrickSpec(0, _patch(spec, 2 * i) + _patch(spec, 2 * i + 1), spec.group)
        for i in range(spec.m // 2)
    )
    layer2 = []
    for i in range(spec.m // 2):
        support = _patch(spec, 2 * i + 1) + _patch(spec, 2 * i + 2)
        if spec.group == "M" and 2 * i + 2 >= spec.m:
            continue  # non-interval wraparound has no matchgate element
        layer2.append(BrickSpec(1, support, spec.group))
    return CircuitSpec(arch, (tuple([layer1, tuple(layer2)]),))


def brickwork_1d(
    n: int,
    depth: int,
    group: str,
    arity: int = 2,
    periodic: bool = False,
) -> CircuitSpec:
    """Standard staggered 1D brickwork with constant-arity bricks.

    Odd layers are offset by half a brick; qubits not covered by a full
    brick in a layer get identity bricks (open boundaries by default).
    """
    arch = ArchitectureGraph.line(n)
    layers = []
    for li in range(depth):
        offset = (li % 2) * (arity // 2)
        bricks = []
        covered = set()
        start = offset
        while start + arity <= n:
            support = tuple(range(start, start + arity))
            bricks.append(BrickSpec(li, support, group))
            covered |= set(support)
            start += arity
        for q in range(n):
            if q not in covered:
                bricks.append(BrickSpec(li, (q,), group, identity=True))
        if periodic and offset and n % arity == 0:
            # wraparound brick over the seam (non-matchgate groups only)
            seam = tuple(range(n - offset, n)) + tuple(range(arity - offset))
            if group != "M":
                bricks = [b for b in bricks if not (b.identity and b.support[0] in seam)]
                bricks.append(BrickSpec(li, seam, group))
        layers.append(tuple(bricks))
    return CircuitSpec(arch, (tuple(layers),))


def fixed_layout(arch: ArchitectureGraph, layers) -> CircuitSpec:
    built = tuple(
        tuple(
            b if isinstance(b, BrickSpec) else BrickSpec(li, tuple(b[0]), b[1])
            for b in layer
        )
        for li, layer in enumerate(layers)
    )
    return CircuitSpec(arch, (built,))


# ---------------------------------------------------------------------------
# Lightcones
# ---------------------------------------------------------------------------


def lightcone(arch: ArchitectureGraph, spec: CircuitSpec, start) -> list:
    """Causal cone of `start`, per depth, through the spec's gate supports.

    Mixtures are treated conservatively (union over layouts).  Identity
    bricks do not spread the cone.  Returns one frozenset per depth,
    index 0 being the start set itself.
    """
    cone = frozenset(int(q) for q in start)
    out = [cone]
    for li in range(spec.depth):
        grown = set(cone)
        for layout in spec.layouts:
            if li >= len(layout):
                continue
            for brick in layout[li]:
                if not brick.identity and cone & set(brick.support):
                    grown |= set(brick.support)
        cone = frozenset(grown)
        out.append(cone)
    return out


def reverse_lightcone(arch: ArchitectureGraph, spec: CircuitSpec, start) -> list:
    """Cone computed through the layers in reverse order."""
    rev_layouts = tuple(tuple(reversed(layout)) for layout in spec.layouts)
    relabeled = tuple(
        tuple(
            tuple(BrickSpec(li, b.support, b.group, b.identity) for b in layer)
            for li, layer in enumerate(layout)
        )
        for layout in rev_layouts
    )
    return lightcone(arch, CircuitSpec(spec.architecture, relabeled, spec.weights), start)


# ---------------------------------------------------------------------------
# Sampling and application
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlacedGate:
    support: tuple
    group: str
    payload: object  # DenseOperator | CliffordTableau | MajoranaRotation

    def dense(self) -> np.ndarray:
        if isinstance(self.payload, DenseOperator):
            return self.payload.mat
        if isinstance(self.payload, CliffordTableau):
            return clifford_to_dense(self.payload).mat
        if isinstance(self.payload, MajoranaRotation):
            return self.payload.to_dense().mat
        raise TypeError(f"cannot densify payload {type(self.payload)!r}")


@dataclass(frozen=True)
class CircuitInstance:
    n: int
    gates: tuple  # ordered PlacedGates, first-applied first
    layout_index: int = 0


def _draw_gate(group: str, support: tuple, rng: RngStream) -> PlacedGate:
    arity = len(support)
    if group == "U":
        payload = DenseOperator(haar_unitary(2**arity, rng), n=arity)
    elif group == "O":
        payload = DenseOperator(
            haar_orthogonal(2**arity, rng).astype(np.complex128), n=arity
        )
    elif group == "Sp":
        form = SymplecticForm.standard(arity)
        payload = DenseOperator(haar_symplectic(form, rng), n=arity)
    elif group == "Cl":
        payload = random_clifford(arity, rng)
    elif group == "M":
        payload = random_matchgate(arity, rng)
    else:  # pragma: no cover
        raise InvalidCircuitSpec(f"unknown group tag {group!r}")
    return PlacedGate(tuple(support), group, payload)


def sample_circuit(spec: CircuitSpec, rng: RngStream) -> CircuitInstance:
    """Draw one circuit: every brick gets an independent Haar element.

    Each brick consumes its own RNG substream keyed by (layout, layer,
    brick), so adding workers or reordering evaluation cannot change
    what any individual brick receives.
    """
    if spec.weights is not None and len(spec.layouts) > 1:
        u = rng.substream(0).random()
        acc, layout_index = 0.0, len(spec.layouts) - 1
        for idx, w in enumerate(spec.weights):
            acc += w
            if u < acc:
                layout_index = idx
                break
    else:
        layout_index = 0
    layout = spec.layouts[layout_index]
    gates = []
    for li, layer in enumerate(layout):
        for bi, brick in enumerate(sorted(layer, key=lambda b: b.support)):
            if brick.identity:
                continue
            brick_rng = rng.substream(1 + li * 4096 + bi)
            gates.append(_draw_gate(brick.group, brick.support, brick_rng))
    return CircuitInstance(spec.n, tuple(gates), layout_index)


def apply_gate_dense(psi: np.ndarray, n: int, gate_mat: np.ndarray, support) -> np.ndarray:
    """Apply a gate to a statevector over n qubits (qubit 0 = most significant)."""
    arity = len(support)
    t = psi.reshape((2,) * n)
    t = np.moveaxis(t, support, range(arity))
    shape = t.shape
    t = gate_mat @ t.reshape(2**arity, -1)
    t = np.moveaxis(t.reshape(shape), range(arity), support)
    return t.reshape(-1)


def apply_circuit_dense(inst: CircuitInstance, psi: np.ndarray, k: int = 1) -> np.ndarray:
    """Dense path: apply the circuit to each of k copies of an n-qubit register."""
    out = np.asarray(psi, dtype=np.complex128)
    for gate in inst.gates:
        mat = gate.dense()
        for c in range(k):
            support = [c * inst.n + q for q in gate.support]
            out = apply_gate_dense(out, k * inst.n, mat, support)
    return out


def circuit_unitary(inst: CircuitInstance) -> np.ndarray:
    """Full 2^n x 2^n matrix of the circuit (small n only)."""
    dim = 2**inst.n
    u = np.eye(dim, dtype=np.complex128)
    for col in range(dim):
        u[:, col] = apply_circuit_dense(inst, u[:, col].copy())
    return u


def is_locally_independent(spec: CircuitSpec):
    """Check that far-apart qubits see no shared randomness.

    Bricks always use disjoint substreams, so the only shared latent is
    the mixture choice over layouts.  Returns (flag, witness, warning):
    witness is a violating qubit pair when the flag is False; warning is
    set when the architecture diameter makes the check vacuous.
    """
    dia = spec.architecture.diameter
    if dia <= 1:
        return True, None, "diameter <= 1: locality condition is vacuous"
    if len(spec.layouts) > 1:
        # the layout latent is shared by every gate; any far pair violates
        dist = spec.architecture._bfs(0)
        far = max(dist, key=dist.get)
        if dist[far] * 2 >= dia:
            return False, (0, far), None
        for a in range(spec.n):
            da = spec.architecture._bfs(a)
            b = max(da, key=da.get)
            if da[b] * 2 >= dia:
                return False, (a, b), None
    return True, None, None
