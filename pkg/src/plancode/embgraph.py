"""Embedded graphs as rotation systems (half-edge structure).

An embedded graph is a simple graph plus, for every node, a clockwise cyclic
order of its incident edge-ends ("darts"). This determines an embedding on an
orientable surface whose genus follows from Euler's formula per component.

Representation: edge i owns darts 2i and 2i+1 (``twin(d) = d ^ 1``);
``node_of[d]`` is the dart's origin; per node the darts form a circular
doubly-linked list (``nxt``/``prv``) in clockwise order. The structure is
insertion-only — operations that delete build a new graph instead — which
keeps chord insertion O(1) and face bookkeeping simple.

Face tracing: the successor of dart d within its face walk is
``nxt[twin(d)]``. Each dart lies on exactly one face walk; a component with
no edges counts as one face by convention.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Iterator, Sequence

from .bits import BitReader, BitWriter
from .errors import CodecError, InvalidEmbedding, TooSmall

__all__ = [
    "EmbeddedGraph",
    "PartGraph",
    "triangulate",
    "canonical_form",
    "canonical_code",
    "canonical_labeling",
    "labeled_equal",
    "write_graph",
    "read_graph",
    "parse_graph_bits",
]


class EmbeddedGraph:
    __slots__ = ("n", "node_of", "nxt", "prv", "first")

    def __init__(self) -> None:
        self.n = 0
        self.node_of: list[int] = []
        self.nxt: list[int] = []
        self.prv: list[int] = []
        self.first: list[int] = []  # some dart at node, -1 if isolated

    # -- construction ----------------------------------------------------

    @classmethod
    def from_rotations(cls, rotations: Sequence[Sequence[int]]) -> "EmbeddedGraph":
        """Build from clockwise neighbor lists. Validates simplicity and
        that every edge appears in both endpoint lists."""
        g = cls()
        n = len(rotations)
        g.n = n
        g.first = [-1] * n
        edge_ids: dict[int, int] = {}
        nedges = 0
        # First pass: assign edge ids (dart 2e at the smaller endpoint).
        for u, nbrs in enumerate(rotations):
            seen: set[int] = set()
            for v in nbrs:
                if not isinstance(v, int) or not 0 <= v < n:
                    raise InvalidEmbedding(f"neighbor {v!r} out of range at node {u}")
                if v == u:
                    raise InvalidEmbedding(f"self-loop at node {u}")
                if v in seen:
                    raise InvalidEmbedding(f"repeated neighbor {v} at node {u}")
                seen.add(v)
                if u < v:
                    edge_ids[u * n + v] = nedges
                    nedges += 1
        g.node_of = [0] * (2 * nedges)
        g.nxt = [0] * (2 * nedges)
        g.prv = [0] * (2 * nedges)
        matched = 0
        for u, nbrs in enumerate(rotations):
            darts = []
            for v in nbrs:
                if u < v:
                    e = edge_ids[u * n + v]
                    d = 2 * e
                else:
                    e = edge_ids.get(v * n + u)
                    if e is None:
                        raise InvalidEmbedding(
                            f"edge ({u},{v}) missing from node {v}'s rotation"
                        )
                    d = 2 * e + 1
                    matched += 1
                g.node_of[d] = u
                darts.append(d)
            if darts:
                g.first[u] = darts[0]
                k = len(darts)
                for i, d in enumerate(darts):
                    g.nxt[d] = darts[(i + 1) % k]
                    g.prv[d] = darts[(i - 1) % k]
        if matched != nedges:
            raise InvalidEmbedding("asymmetric rotation lists")
        return g

    def copy(self) -> "EmbeddedGraph":
        g = EmbeddedGraph()
        g.n = self.n
        g.node_of = self.node_of[:]
        g.nxt = self.nxt[:]
        g.prv = self.prv[:]
        g.first = self.first[:]
        return g

    # -- basic accessors ---------------------------------------------------

    @property
    def num_edges(self) -> int:
        return len(self.node_of) // 2

    @property
    def num_darts(self) -> int:
        return len(self.node_of)

    def head(self, d: int) -> int:
        """Node the dart points to (origin of its twin)."""
        return self.node_of[d ^ 1]

    def darts_at(self, v: int) -> Iterator[int]:
        d0 = self.first[v]
        if d0 < 0:
            return
        d = d0
        while True:
            yield d
            d = self.nxt[d]
            if d == d0:
                break

    def degree(self, v: int) -> int:
        return sum(1 for _ in self.darts_at(v))

    def neighbors(self, v: int) -> list[int]:
        return [self.head(d) for d in self.darts_at(v)]

    def min_dart_at(self, v: int) -> int:
        """Dart at v with the smallest head label; -1 if isolated."""
        best = -1
        best_head = -1
        for d in self.darts_at(v):
            h = self.head(d)
            if best < 0 or h < best_head:
                best, best_head = d, h
        return best

    def rotation_from(self, d0: int) -> list[int]:
        """Darts at origin(d0) in clockwise order starting at d0."""
        out = [d0]
        d = self.nxt[d0]
        while d != d0:
            out.append(d)
            d = self.nxt[d]
        return out

    def to_rotations(self) -> list[list[int]]:
        """Neighbor lists, each starting at the smallest neighbor label.
        Canonical for a fixed labeling; basis for equality and hashing."""
        out: list[list[int]] = []
        for v in range(self.n):
            d = self.min_dart_at(v)
            out.append([self.head(x) for x in self.rotation_from(d)] if d >= 0 else [])
        return out

    def has_edge(self, u: int, v: int) -> bool:
        return any(self.head(d) == v for d in self.darts_at(u))

    def dart_between(self, u: int, v: int) -> int:
        for d in self.darts_at(u):
            if self.head(d) == v:
                return d
        return -1

    def edges(self) -> Iterator[tuple[int, int]]:
        for e in range(self.num_edges):
            u, v = self.node_of[2 * e], self.node_of[2 * e + 1]
            yield (u, v) if u < v else (v, u)

    # -- mutation (insertion only) ----------------------------------------

    def add_node(self) -> int:
        self.n += 1
        self.first.append(-1)
        return self.n - 1

    def _new_dart(self, v: int) -> int:
        d = len(self.node_of)
        self.node_of.append(v)
        self.nxt.append(d)
        self.prv.append(d)
        return d

    def _insert_dart_before(self, d_new: int, d_ref: int) -> None:
        p = self.prv[d_ref]
        self.nxt[p] = d_new
        self.prv[d_new] = p
        self.nxt[d_new] = d_ref
        self.prv[d_ref] = d_new

    def insert_chord(self, da: int, db: int) -> tuple[int, int]:
        """Add edge between origin(da) and origin(db), threaded through the
        face corners immediately before da and db.

        Precondition (not checked): the two corners lie on the same face
        walk and the origins are distinct and non-adjacent. Splits that face
        into two. Returns the new darts (at origin(da), at origin(db)).
        """
        u, v = self.node_of[da], self.node_of[db]
        eu = self._new_dart(u)
        ev = self._new_dart(v)
        self._insert_dart_before(eu, da)
        self._insert_dart_before(ev, db)
        return eu, ev

    def insert_leaf(self, d_at: int) -> tuple[int, int, int]:
        """Add a new degree-1 node attached at the face corner before d_at.
        Returns (new node, dart at origin, dart at leaf)."""
        u = self.node_of[d_at]
        w = self.add_node()
        eu = self._new_dart(u)
        ew = self._new_dart(w)
        self._insert_dart_before(eu, d_at)
        self.first[w] = ew
        return w, eu, ew

    def add_isolated_edge(self, u: int, v: int) -> tuple[int, int]:
        """Add edge between two currently isolated nodes (first edge each)."""
        du = self._new_dart(u)
        dv = self._new_dart(v)
        self.first[u] = du
        self.first[v] = dv
        return du, dv

    def attach_edge(self, d_at: int, v: int) -> tuple[int, int]:
        """Add edge from origin(d_at) (corner before d_at) to isolated node v."""
        u = self.node_of[d_at]
        du = self._new_dart(u)
        dv = self._new_dart(v)
        self._insert_dart_before(du, d_at)
        self.first[v] = dv
        return du, dv

    # -- faces / genus -----------------------------------------------------

    def face_next(self, d: int) -> int:
        return self.nxt[d ^ 1]

    def faces(self) -> list[list[int]]:
        """All face walks as dart lists, in order of smallest member dart.
        Components without edges contribute no walk."""
        nd = len(self.node_of)
        seen = bytearray(nd)
        out: list[list[int]] = []
        nxt = self.nxt
        for d0 in range(nd):
            if seen[d0]:
                continue
            walk = []
            d = d0
            while not seen[d]:
                seen[d] = 1
                walk.append(d)
                d = nxt[d ^ 1]
            out.append(walk)
        return out

    def face_of_darts(self) -> tuple[list[int], int]:
        """Map dart -> face index (faces ordered by smallest dart)."""
        nd = len(self.node_of)
        face_of = [-1] * nd
        nxt = self.nxt
        count = 0
        for d0 in range(nd):
            if face_of[d0] >= 0:
                continue
            d = d0
            while face_of[d] < 0:
                face_of[d] = count
                d = nxt[d ^ 1]
            count += 1
        return face_of, count

    def components(self) -> list[list[int]]:
        """Connected components as sorted node lists, ordered by min node."""
        comp = [-1] * self.n
        out = []
        for s in range(self.n):
            if comp[s] >= 0:
                continue
            cid = len(out)
            comp[s] = cid
            stack = [s]
            nodes = [s]
            while stack:
                u = stack.pop()
                for d in self.darts_at(u):
                    w = self.head(d)
                    if comp[w] < 0:
                        comp[w] = cid
                        stack.append(w)
                        nodes.append(w)
            out.append(sorted(nodes))
        return out

    def component_ids(self) -> tuple[list[int], int]:
        comp = [-1] * self.n
        count = 0
        for s in range(self.n):
            if comp[s] >= 0:
                continue
            comp[s] = count
            stack = [s]
            while stack:
                u = stack.pop()
                for d in self.darts_at(u):
                    w = self.head(d)
                    if comp[w] < 0:
                        comp[w] = count
                        stack.append(w)
            count += 1
        return comp, count

    @property
    def connected(self) -> bool:
        if self.n <= 1:
            return True
        return len(self.components()) == 1

    def genus(self) -> int:
        """Euler genus, summed over components. Raises InvalidEmbedding if
        any component's Euler deficiency is odd or negative."""
        comp, ncomp = self.component_ids()
        vcount = [0] * ncomp
        ecount = [0] * ncomp
        fcount = [0] * ncomp
        for v in range(self.n):
            vcount[comp[v]] += 1
        for e in range(self.num_edges):
            ecount[comp[self.node_of[2 * e]]] += 1
        for walk in self.faces():
            fcount[comp[self.node_of[walk[0]]]] += 1
        total = 0
        for c in range(ncomp):
            if ecount[c] == 0:
                continue  # isolated node: one face, genus 0 by convention
            deficiency = 2 - (vcount[c] - ecount[c] + fcount[c])
            if deficiency < 0 or deficiency % 2:
                raise InvalidEmbedding("rotation system has inconsistent Euler count")
            total += deficiency // 2
        return total

    # -- derived graphs ------------------------------------------------------

    def relabel(self, perm: Sequence[int]) -> "EmbeddedGraph":
        """New graph where old node v becomes perm[v]. perm must be a bijection."""
        n = self.n
        inv = [-1] * n
        for old, new in enumerate(perm):
            if not 0 <= new < n or inv[new] >= 0:
                raise ValueError("perm is not a bijection")
            inv[new] = old
        rots: list[list[int]] = []
        for new in range(n):
            old = inv[new]
            d = self.min_dart_at(old)
            if d < 0:
                rots.append([])
                continue
            nbrs = [perm[self.head(x)] for x in self.rotation_from(d)]
            # rotate so the smallest new label starts (canonical storage)
            k = nbrs.index(min(nbrs))
            rots.append(nbrs[k:] + nbrs[:k])
        return EmbeddedGraph.from_rotations(rots)

    def induced(self, nodes: Iterable[int]) -> tuple["EmbeddedGraph", list[int]]:
        """Induced embedded subgraph. Returns (graph, ids) where ids[i] is
        the original node of new node i (ascending)."""
        ids = sorted(set(nodes))
        idx = {v: i for i, v in enumerate(ids)}
        rots = []
        for v in ids:
            d0 = self.first[v]
            row = []
            if d0 >= 0:
                for d in self.rotation_from(d0):
                    w = self.head(d)
                    j = idx.get(w)
                    if j is not None:
                        row.append(j)
            rots.append(row)
        return EmbeddedGraph.from_rotations(rots), ids

    def neighbors_of_set(self, nodes: Iterable[int]) -> set[int]:
        ns = set(nodes)
        out: set[int] = set()
        for v in ns:
            for d in self.darts_at(v):
                w = self.head(d)
                if w not in ns:
                    out.add(w)
        return out

    def part_graph(self, part: Iterable[int]) -> "PartGraph":
        """The embedded subgraph on part + its neighborhood, keeping every
        edge incident to the part but none between two neighborhood nodes."""
        ps = set(part)
        boundary = self.neighbors_of_set(ps)
        ids = sorted(ps | boundary)
        idx = {v: i for i, v in enumerate(ids)}
        rots = []
        for v in ids:
            row = []
            d0 = self.first[v]
            if d0 >= 0:
                if v in ps:
                    row = [idx[self.head(d)] for d in self.rotation_from(d0)]
                else:
                    for d in self.rotation_from(d0):
                        w = self.head(d)
                        if w in ps:
                            row.append(idx[w])
            rots.append(row)
        g = EmbeddedGraph.from_rotations(rots)
        return PartGraph(graph=g, ids=ids, boundary=frozenset(idx[v] for v in boundary))

    def __repr__(self) -> str:
        return f"EmbeddedGraph(n={self.n}, m={self.num_edges})"


class PartGraph:
    """Result of EmbeddedGraph.part_graph: the subgraph, original ids of its
    nodes, and which (local) nodes are boundary."""

    __slots__ = ("graph", "ids", "boundary")

    def __init__(self, graph: EmbeddedGraph, ids: list[int], boundary: frozenset):
        self.graph = graph
        self.ids = ids
        self.boundary = boundary


# -- triangulation -------------------------------------------------------------


def triangulate(g: EmbeddedGraph) -> EmbeddedGraph:
    """Return a copy of g with chords added until every face walk has
    length 3. Nodes are unchanged; genus and simplicity are preserved.

    Requires a connected graph on >= 3 nodes. Works by ear clipping on each
    face walk: a corner whose two walk-neighbors are distinct and
    non-adjacent is cut off by a chord. For every face of a genus-0
    embedding such a corner exists (two adjacent blocking chords would have
    to cross outside the face); on higher-genus faces it can genuinely not
    exist (e.g. a complete graph embedded with a large face), in which case
    this raises InvalidEmbedding.
    """
    if g.n < 3:
        raise TooSmall("triangulation needs at least 3 nodes")
    if not g.connected:
        raise InvalidEmbedding("triangulate requires a connected graph")
    out = g.copy()
    n = out.n
    adj = set()
    for u, v in out.edges():
        adj.add(u * n + v)
        adj.add(v * n + u)

    if out.num_edges == 0:
        raise InvalidEmbedding("triangulate requires at least one edge")

    for walk in out.faces():
        _clip_face(out, walk, adj)
    return out


def _clip_face(g: EmbeddedGraph, walk: list[int], adj: set[int]) -> None:
    """Clip ears off one face walk until it is a triangle. ``walk`` is the
    dart list of the face; ``adj`` is the live global adjacency set."""
    s = len(walk)
    if s <= 3:
        return
    n = g.n
    # circular doubly-linked list over positions; entry darts mutate as
    # chords replace a corner's leaving dart
    nxt_pos = list(range(1, s)) + [0]
    prv_pos = [s - 1] + list(range(s - 1))
    dart = walk[:]  # leaving dart of each live position
    node = [g.node_of[d] for d in walk]
    alive = [True] * s
    remaining = s
    cand = deque(range(s))
    while remaining > 3:
        if not cand:
            raise InvalidEmbedding(
                "face cannot be triangulated by chords (non-planar face)"
            )
        i = cand.popleft()
        if not alive[i]:
            continue
        ip, iq = prv_pos[i], nxt_pos[i]
        a, b = node[ip], node[iq]
        if a == b or (a * n + b) in adj:
            continue
        # clip corner i: chord between the corners at ip and iq
        ea, _eb = g.insert_chord(dart[ip], dart[iq])
        adj.add(a * n + b)
        adj.add(b * n + a)
        dart[ip] = ea  # position ip now leaves along the chord
        alive[i] = False
        remaining -= 1
        nxt_pos[ip] = iq
        prv_pos[iq] = ip
        cand.append(ip)
        cand.append(iq)


# -- canonical forms -----------------------------------------------------------


def _traversal_stream(g: EmbeddedGraph, start: int) -> tuple[tuple[int, ...], list[int]]:
    """Token stream of the rotation-aware BFS from start dart, plus the
    labeling it induces (old node -> new label).

    Tokens: for each node in label order, its degree followed by the labels
    of its neighbors in clockwise rotation order. The root's rotation starts
    at the start dart; every other node's rotation starts at the dart back
    to the node that first mentioned it. Neighbors are labeled at first
    mention. The stream determines the labeled rotation system exactly.
    """
    label = [-1] * g.n
    root = g.node_of[start]
    label[root] = 0
    entry = [start]  # entry[i] = rotation start dart of the node labeled i
    tokens: list[int] = []
    i = 0
    while i < len(entry):
        e = entry[i]
        rot = g.rotation_from(e)
        tokens.append(len(rot))
        for d in rot:
            w = g.head(d)
            if label[w] < 0:
                label[w] = len(entry)
                entry.append(d ^ 1)
            tokens.append(label[w])
        i += 1
    return tuple(tokens), label


def _traversal_stream_bounded(
    g: EmbeddedGraph, start: int, best: tuple[int, ...] | None
) -> tuple[tuple[int, ...], list[int]] | None:
    """_traversal_stream, but abandons the walk as soon as the stream is
    lexicographically greater than `best`. All streams of one graph have the
    same length (n + 2E tokens), so positional comparison decides. Returns
    None when the stream cannot beat (or tie) best."""
    label = [-1] * g.n
    root = g.node_of[start]
    label[root] = 0
    entry = [start]
    tokens: list[int] = []
    undecided = best is not None  # still equal to best's prefix
    i = 0
    while i < len(entry):
        e = entry[i]
        rot = g.rotation_from(e)
        tokens.append(len(rot))
        if undecided:
            ref = best[len(tokens) - 1]  # type: ignore[index]
            if len(rot) > ref:
                return None
            if len(rot) < ref:
                undecided = False
        for d in rot:
            w = g.head(d)
            if label[w] < 0:
                label[w] = len(entry)
                entry.append(d ^ 1)
            tokens.append(label[w])
            if undecided:
                ref = best[len(tokens) - 1]  # type: ignore[index]
                if tokens[-1] > ref:
                    return None
                if tokens[-1] < ref:
                    undecided = False
        i += 1
    return tuple(tokens), label


def canonical_form(g: EmbeddedGraph) -> tuple[tuple[int, ...], list[int]]:
    """Minimal traversal stream over all start darts, with its labeling.
    Connected graphs with at least one edge only.

    Only darts at minimum-degree nodes can start the minimal stream (its
    first token is the root degree), and candidate walks are abandoned as
    soon as they exceed the incumbent; the result equals the full minimum."""
    if g.num_edges == 0:
        if g.n == 1:
            return (0,), [0]
        raise ValueError("canonical_form requires a connected graph with an edge")
    degs = [g.degree(v) for v in range(g.n)]
    dmin = min(degs)
    best: tuple[int, ...] | None = None
    best_label: list[int] | None = None
    for d in range(g.num_darts):
        if degs[g.node_of[d]] != dmin:
            continue
        got = _traversal_stream_bounded(g, d, best)
        if got is None:
            continue
        stream, label = got
        if best is None or stream < best:
            best, best_label = stream, label
    assert best is not None and best_label is not None
    return best, best_label


def canonical_labeling(g: EmbeddedGraph) -> list[int]:
    """Canonical labeling for a graph with any number of components.

    Components are canonically labeled individually, then assigned label
    offsets in sorted order of their serialized canonical codes (ties broken
    by original order, which cannot change the relabeled graph).
    """
    comps = g.components()
    if len(comps) == 1:
        return canonical_form(g)[1]
    keyed = []
    for nodes in comps:
        sub, ids = g.induced(nodes)
        _, lab = canonical_form(sub)
        code = write_graph(sub.relabel(lab))
        keyed.append(((len(code), code.value), ids, lab))
    keyed.sort(key=lambda t: t[0])
    label = [-1] * g.n
    offset = 0
    for _, ids, lab in keyed:
        for local, old in enumerate(ids):
            label[old] = offset + lab[local]
        offset += len(ids)
    return label


def canonical_code(g: EmbeddedGraph):
    """Serialized canonical form: isomorphic embedded graphs (as unlabeled
    rotation systems, orientation-preserving) get equal codes."""
    return write_graph(g.relabel(canonical_labeling(g)))


def labeled_equal(a: EmbeddedGraph, b: EmbeddedGraph) -> bool:
    """Equality as labeled embedded graphs (same nodes, edges, rotations)."""
    return a.n == b.n and a.to_rotations() == b.to_rotations()


# -- bit serialization -----------------------------------------------------------


def write_graph(g: EmbeddedGraph):
    """Serialize a labeled embedded graph: gamma(n), then per node gamma(deg)
    and its neighbors in clockwise order from the smallest, each in
    ceil(log2 n) fixed-width bits."""
    w = BitWriter()
    write_graph_into(w, g)
    return w.build()


def write_graph_into(w: BitWriter, g: EmbeddedGraph) -> None:
    n = g.n
    w.write_uint(n)
    width = max(n - 1, 0).bit_length()
    for row in g.to_rotations():
        w.write_uint(len(row))
        for v in row:
            w.write_uint_bits(v, width)


def read_graph(r: BitReader) -> EmbeddedGraph:
    """Inverse of write_graph_into. Raises CodecError on malformed input."""
    n = r.read_uint()
    if n > len(r):
        raise CodecError("declared node count exceeds stream size")
    width = max(n - 1, 0).bit_length()
    rots: list[list[int]] = []
    for _ in range(n):
        deg = r.read_uint()
        if deg >= n:
            raise CodecError("degree exceeds node count")
        rots.append([r.read_uint_bits(width) for _ in range(deg)])
    try:
        return EmbeddedGraph.from_rotations(rots)
    except InvalidEmbedding as e:
        raise CodecError(f"embedded rotation lists invalid: {e}") from e


def parse_graph_bits(bs) -> EmbeddedGraph:
    r = BitReader(bs)
    g = read_graph(r)
    if r.remaining:
        raise CodecError("trailing bits after graph")
    return g
