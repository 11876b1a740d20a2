"""Per-class tables of small embedded graphs.

A table for a graph class holds, for every node count m up to a cap, the
sorted list of serialized canonical forms ("codes") of all class members
with exactly m nodes, up to orientation-preserving embedded isomorphism.
A member is then identified by its index into that list, written in
``ceil(log2 count)`` fixed bits — the minimal fixed-width code for the
class at that size.

Tables are deterministic: the same (class, cap) pair always produces the
same member lists, so an encoder and a decoder that build their own copies
agree on every index. Built tables are cached on disk and can be serialized
into a self-delimiting bit stream (used verbatim as the inline table section
of containers).

Member enumeration routes:

- Connected members grow breadth-first from the single node by two moves
  that preserve genus 0 — a chord between two distinct, non-adjacent corners
  of one face, and a pendant node at a face corner — with canonical-code
  deduplication. Every connected member is reachable: reversing a move
  deletes either a leaf or a non-bridge edge (which merges its two distinct
  incident faces), and the classes here are closed under both deletions.
- Triangulations are enumerated separately: star a face of each
  (m-1)-node member with a fresh degree-3 node, then close within size m
  under diagonal flips and mirroring (flip connectivity holds up to
  reflection, so the mirror move lifts it to oriented members; it also
  reaches members with no degree-3 node, which starring alone cannot).
- Classes that admit disconnected members take every multiset of connected
  members with sizes summing to m, realized as a disjoint union.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterator

from .bits import BitReader, BitString, BitWriter, ceil_log2
from .constants import DEFAULT_MAX_CAP, BYPASS_CAP
from .embgraph import (
    EmbeddedGraph,
    canonical_code,
    read_graph,
    write_graph_into,
)
from .errors import CapTooLarge, ChecksFailed, CodecError, NotInClass

__all__ = [
    "GraphClass",
    "ClassTable",
    "CLASSES",
    "CLASS_ORDER",
    "get_class",
    "build_table",
    "is_plane",
    "is_plane_connected",
    "is_plane_triangulation",
    "is_forest_deg5",
]


# -- class membership predicates ---------------------------------------------


def is_plane(g: EmbeddedGraph) -> bool:
    """Embedded on the sphere (genus 0); any number of components."""
    return g.genus() == 0


def is_plane_connected(g: EmbeddedGraph) -> bool:
    """Connected and embedded on the sphere."""
    return g.connected and g.genus() == 0


def is_plane_triangulation(g: EmbeddedGraph) -> bool:
    """Connected sphere embedding with at least 3 nodes and all faces
    of length 3 (includes the triangle and every stacked/flipped variant)."""
    return (
        g.n >= 3
        and g.connected
        and g.genus() == 0
        and all(len(walk) == 3 for walk in g.faces())
    )


def is_forest_deg5(g: EmbeddedGraph) -> bool:
    """Acyclic with maximum degree 5; any number of components. (Embedded
    forests always have genus 0: a tree's rotation system has one face.)"""
    if any(g.degree(v) > 5 for v in range(g.n)):
        return False
    return g.num_edges == g.n - len(g.components())


# -- class registry -----------------------------------------------------------


@dataclass(frozen=True)
class GraphClass:
    """A graph class the codec can operate on.

    member: full membership predicate on embedded graphs.
    connected_only: every member is connected (no disjoint-union composition).
    triangulation: members are enumerated by the star/flip route.
    patch: how part graphs are completed into members before table lookup —
        "none" (part graphs are members as-is), "connect" (link components
        with deletable edges), or "star" (link components, then star
        non-triangular faces with deletable nodes).
    chord_moves: whether the connected-member enumeration tries chord
        insertions (pointless for acyclic classes).
    """

    name: str
    member: Callable[[EmbeddedGraph], bool]
    connected_only: bool
    triangulation: bool = False
    patch: str = "none"
    chord_moves: bool = True


CLASS_ORDER: tuple[str, ...] = (
    "planar",
    "plane-connected",
    "plane-triangulation",
    "forest-deg5",
)

CLASSES: dict[str, GraphClass] = {
    "planar": GraphClass(
        name="planar",
        member=is_plane,
        connected_only=False,
    ),
    "plane-connected": GraphClass(
        name="plane-connected",
        member=is_plane_connected,
        connected_only=True,
        patch="connect",
    ),
    "plane-triangulation": GraphClass(
        name="plane-triangulation",
        member=is_plane_triangulation,
        connected_only=True,
        triangulation=True,
        patch="star",
    ),
    "forest-deg5": GraphClass(
        name="forest-deg5",
        member=is_forest_deg5,
        connected_only=False,
        chord_moves=False,
    ),
}


def get_class(name: str) -> GraphClass:
    try:
        return CLASSES[name]
    except KeyError:
        known = ", ".join(CLASS_ORDER)
        raise ValueError(f"unknown graph class {name!r} (known: {known})") from None


# -- enumeration: connected members -------------------------------------------


def _connected_members(
    gclass: GraphClass, cap: int
) -> dict[int, dict[BitString, EmbeddedGraph]]:
    """All connected members with 1..cap nodes, keyed by canonical code."""
    out: dict[int, dict[BitString, EmbeddedGraph]] = {m: {} for m in range(1, cap + 1)}
    queue: deque[EmbeddedGraph] = deque()

    def admit(g: EmbeddedGraph) -> None:
        if not gclass.member(g):
            return
        code = canonical_code(g)
        bucket = out[g.n]
        if code in bucket:
            return
        bucket[code] = g
        queue.append(g)

    if cap < 1:
        return out
    admit(EmbeddedGraph.from_rotations([[]]))
    while queue:
        g = queue.popleft()
        if g.n == 1:
            if cap >= 2:
                admit(EmbeddedGraph.from_rotations([[1], [0]]))
            continue
        if g.n < cap:
            for d in range(g.num_darts):
                h = g.copy()
                h.insert_leaf(d)
                admit(h)
        if gclass.chord_moves:
            face_of, nfaces = g.face_of_darts()
            by_face: list[list[int]] = [[] for _ in range(nfaces)]
            for d in range(g.num_darts):
                by_face[face_of[d]].append(d)
            for darts in by_face:
                for i, da in enumerate(darts):
                    u = g.node_of[da]
                    for db in darts[i + 1 :]:
                        v = g.node_of[db]
                        if u == v or g.has_edge(u, v):
                            continue
                        h = g.copy()
                        h.insert_chord(da, db)
                        admit(h)
    return out


# -- enumeration: triangulations ----------------------------------------------


def _rot_successor(rots: list[list[int]], v: int, u: int) -> int:
    """Neighbor following u in v's clockwise rotation."""
    row = rots[v]
    i = row.index(u)
    return row[(i + 1) % len(row)]


def _star_rotations(rots: list[list[int]], a: int, b: int, c: int) -> list[list[int]]:
    """Insert a fresh degree-3 node into the face with corner walk a, b, c.
    The new node lands in the corner of that face at each of a, b, c, which
    is the position right after the previous walk node in each rotation."""
    r = [list(row) for row in rots]
    z = len(r)
    r[b].insert(r[b].index(a) + 1, z)
    r[c].insert(r[c].index(b) + 1, z)
    r[a].insert(r[a].index(c) + 1, z)
    r.append([a, c, b])
    return r


def _flip_rotations(rots: list[list[int]], u: int, v: int) -> list[list[int]] | None:
    """Diagonal flip of edge {u, v}: replace it with the edge between the
    two opposite corners w, x of its incident triangles. Returns None when
    the flip is invalid (w = x or {w, x} already present)."""
    w = _rot_successor(rots, v, u)
    x = _rot_successor(rots, u, v)
    if w == x or w in rots[x]:
        return None
    r = [list(row) for row in rots]
    r[u].remove(v)
    r[v].remove(u)
    r[w].insert(r[w].index(v) + 1, x)
    r[x].insert(r[x].index(u) + 1, w)
    return r


def _mirror_rotations(rots: list[list[int]]) -> list[list[int]]:
    return [list(reversed(row)) for row in rots]


def _triangulation_members(
    gclass: GraphClass, cap: int
) -> dict[int, dict[BitString, EmbeddedGraph]]:
    """All members with 3..cap nodes: stars of the previous size seed each
    size, then the size is closed under flips and mirroring."""
    out: dict[int, dict[BitString, EmbeddedGraph]] = {m: {} for m in range(1, cap + 1)}
    for m in range(3, cap + 1):
        frontier: dict[BitString, EmbeddedGraph] = {}
        queue: deque[EmbeddedGraph] = deque()

        def admit(rots: list[list[int]]) -> None:
            g = EmbeddedGraph.from_rotations(rots)
            if not gclass.member(g):
                raise ChecksFailed(
                    "triangulation move produced a non-member (enumeration bug)"
                )
            code = canonical_code(g)
            if code not in frontier:
                frontier[code] = g
                queue.append(g)

        if m == 3:
            admit([[1, 2], [2, 0], [0, 1]])
        else:
            for g in out[m - 1].values():
                rots = g.to_rotations()
                for walk in g.faces():
                    a, b, c = (g.node_of[d] for d in walk)
                    admit(_star_rotations(rots, a, b, c))
        while queue:
            g = queue.popleft()
            rots = g.to_rotations()
            admit(_mirror_rotations(rots))
            for u, v in g.edges():
                flipped = _flip_rotations(rots, u, v)
                if flipped is not None:
                    admit(flipped)
        out[m] = frontier
    return out


# -- enumeration: disconnected composition -------------------------------------


def _disjoint_union(parts: list[EmbeddedGraph]) -> EmbeddedGraph:
    rows: list[list[int]] = []
    offset = 0
    for g in parts:
        rows.extend([x + offset for x in row] for row in g.to_rotations())
        offset += g.n
    return EmbeddedGraph.from_rotations(rows)


def _compose_disconnected(
    gclass: GraphClass,
    connected: dict[int, dict[BitString, EmbeddedGraph]],
    cap: int,
) -> Iterator[EmbeddedGraph]:
    """Disjoint unions of >= 2 connected members with total size <= cap.
    Components are chosen in nondecreasing (size, code) order, so each
    multiset is produced exactly once."""
    pool: list[tuple[tuple[int, int, int], EmbeddedGraph]] = []
    for size in sorted(connected):
        for code, g in connected[size].items():
            pool.append(((size, len(code), code.value), g))
    pool.sort(key=lambda t: t[0])

    chosen: list[EmbeddedGraph] = []

    def grow(start: int, budget: int) -> Iterator[EmbeddedGraph]:
        for idx in range(start, len(pool)):
            key, g = pool[idx]
            if g.n > budget:
                continue
            chosen.append(g)
            if len(chosen) >= 2:
                u = _disjoint_union(chosen)
                if not gclass.member(u):
                    raise ChecksFailed(
                        "disjoint union left the class (composition bug)"
                    )
                yield u
            yield from grow(idx, budget - g.n)
            chosen.pop()

    yield from grow(0, cap)


# -- the table -----------------------------------------------------------------


class ClassTable:
    """Sorted canonical-code lists for one class, by member node count."""

    def __init__(self, gclass: GraphClass, cap: int, members: list[list[BitString]]):
        if len(members) != cap + 1:
            raise ValueError("members list must have one entry per size 0..cap")
        self.gclass = gclass
        self.cap = cap
        self._members = members
        self._index: dict[BitString, tuple[int, int]] = {}
        for m in range(cap + 1):
            for i, code in enumerate(members[m]):
                self._index[code] = (m, i)

    @property
    def name(self) -> str:
        return self.gclass.name

    def num(self, m: int) -> int:
        """Number of members with exactly m nodes."""
        if not 1 <= m <= self.cap:
            raise ValueError(f"size {m} outside table range 1..{self.cap}")
        return len(self._members[m])

    def width(self, m: int) -> int:
        """Bits of a member index at size m: ceil(log2 num), 0 when num <= 1."""
        count = self.num(m)
        return ceil_log2(count) if count >= 1 else 0

    def member_code(self, m: int, idx: int) -> BitString:
        if not 1 <= m <= self.cap or not 0 <= idx < len(self._members[m]):
            raise CodecError(
                f"member index {idx} out of range for class {self.name} size {m}"
            )
        return self._members[m][idx]

    def member_graph(self, m: int, idx: int) -> EmbeddedGraph:
        code = self.member_code(m, idx)
        r = BitReader(code)
        g = read_graph(r)
        if r.remaining:
            raise CodecError("trailing bits in table member code")
        return g

    def index_of(self, g: EmbeddedGraph) -> tuple[int, int]:
        """(size, index) of a member graph; the graph's labeling is ignored."""
        if g.n > self.cap:
            raise CapTooLarge(
                f"graph has {g.n} nodes but the {self.name} table caps at {self.cap}"
            )
        code = canonical_code(g)
        try:
            return self._index[code]
        except KeyError:
            raise NotInClass(
                f"graph is not a {self.name} member of size {g.n}"
            ) from None

    def __contains__(self, g: EmbeddedGraph) -> bool:
        try:
            self.index_of(g)
            return True
        except (CapTooLarge, NotInClass):
            return False

    def counts(self) -> list[int]:
        """Member counts for sizes 1..cap."""
        return [len(self._members[m]) for m in range(1, self.cap + 1)]

    # -- serialization ---------------------------------------------------------

    def serialize(self) -> BitString:
        w = BitWriter()
        self.serialize_into(w)
        return w.build()

    def serialize_into(self, w: BitWriter) -> None:
        """Self-delimiting stream: class id, cap, then per size the member
        count followed by the member codes (each itself self-delimiting)."""
        w.write_uint(CLASS_ORDER.index(self.name))
        w.write_uint(self.cap)
        for m in range(1, self.cap + 1):
            w.write_uint(len(self._members[m]))
            for code in self._members[m]:
                w.write_bits(code)

    @classmethod
    def deserialize_from(cls, r: BitReader, verify: bool = False) -> "ClassTable":
        class_id = r.read_uint()
        if class_id >= len(CLASS_ORDER):
            raise CodecError(f"unknown graph class id {class_id}")
        gclass = CLASSES[CLASS_ORDER[class_id]]
        cap = r.read_uint()
        if cap < 1 or cap > 64:
            raise CodecError(f"implausible table cap {cap}")
        members: list[list[BitString]] = [[] for _ in range(cap + 1)]
        for m in range(1, cap + 1):
            count = r.read_uint()
            if count > 1 << 24:
                raise CodecError(f"implausible member count {count}")
            for _ in range(count):
                g = read_graph(r)
                code = _graph_code(g)
                if verify:
                    if g.n != m:
                        raise CodecError("table member has the wrong node count")
                    if not gclass.member(g):
                        raise CodecError("table member fails the class predicate")
                    if canonical_code(g) != code:
                        raise CodecError("table member code is not canonical")
                members[m].append(code)
            if verify:
                keys = [(len(c), c.value) for c in members[m]]
                if keys != sorted(set(keys)):
                    raise CodecError("table member codes not strictly sorted")
        return cls(gclass, cap, members)

    @classmethod
    def from_bits(cls, bits: BitString, verify: bool = False) -> "ClassTable":
        r = BitReader(bits)
        table = cls.deserialize_from(r, verify=verify)
        if r.remaining:
            raise CodecError("trailing bits after table")
        return table


def _graph_code(g: EmbeddedGraph) -> BitString:
    """Serialized form of a labeled graph (the code stored in tables is the
    serialization of the canonically relabeled member, so parsing a member
    and re-serializing it reproduces the stored bits exactly)."""
    w = BitWriter()
    write_graph_into(w, g)
    return w.build()


# -- building and caching -------------------------------------------------------


_TABLE_MEMO: dict[tuple[str, int], ClassTable] = {}

_CACHE_MAGIC = b"PLTB"
_CACHE_VERSION = 1


def default_cap(name: str) -> int:
    get_class(name)
    return BYPASS_CAP[name]


def _cache_root(cache_dir: str | None) -> str:
    if cache_dir is not None:
        return cache_dir
    env = os.environ.get("PLANCODE_CACHE_DIR")
    if env:
        return env
    return os.path.join(os.path.expanduser("~"), ".cache", "plancode")


def _cache_path(root: str, name: str, cap: int) -> str:
    return os.path.join(root, f"{name}-cap{cap}.tbl")


def _load_cache_file(path: str) -> ClassTable | None:
    try:
        with open(path, "rb") as f:
            blob = f.read()
        if len(blob) < 13 or blob[:4] != _CACHE_MAGIC or blob[4] != _CACHE_VERSION:
            return None
        bitlen = int.from_bytes(blob[5:13], "big")
        payload = blob[13:]
        if bitlen > 8 * len(payload):
            return None
        bits = BitString.from_bytes(payload, bitlen)
        return ClassTable.from_bits(bits, verify=True)
    except (OSError, CodecError, ValueError):
        return None


def _store_cache_file(path: str, table: ClassTable) -> None:
    try:
        os.makedirs(os.path.dirname(path), exist_ok=True)
        bits = table.serialize()
        blob = (
            _CACHE_MAGIC
            + bytes([_CACHE_VERSION])
            + len(bits).to_bytes(8, "big")
            + bits.to_bytes()
        )
        tmp = f"{path}.tmp{os.getpid()}"
        with open(tmp, "wb") as f:
            f.write(blob)
        os.replace(tmp, path)
    except OSError:
        pass  # cache is best-effort; the built table is still returned


def _sort_key(code: BitString) -> tuple[int, int]:
    return (len(code), code.value)


def _enumerate_members(gclass: GraphClass, cap: int) -> list[list[BitString]]:
    if gclass.triangulation:
        by_size = _triangulation_members(gclass, cap)
    else:
        by_size = _connected_members(gclass, cap)
        if not gclass.connected_only:
            for g in _compose_disconnected(gclass, dict(by_size), cap):
                code = canonical_code(g)
                by_size[g.n].setdefault(code, g)
    members: list[list[BitString]] = [[]]
    for m in range(1, cap + 1):
        members.append(sorted(by_size.get(m, {}), key=_sort_key))
    return members


def build_table(
    name: str,
    cap: int | None = None,
    *,
    max_cap: int = DEFAULT_MAX_CAP,
    cache: bool = True,
    cache_dir: str | None = None,
) -> ClassTable:
    """Build (or load) the member table for a class up to the given size cap.

    Tables are memoized per process and cached on disk under
    $PLANCODE_CACHE_DIR (default ~/.cache/plancode). Raises CapTooLarge when
    cap exceeds max_cap — enumeration cost grows steeply with cap, so the
    guard must be raised explicitly by the caller.
    """
    gclass = get_class(name)
    if cap is None:
        cap = default_cap(name)
    if cap < 1:
        raise ValueError(f"table cap must be >= 1, got {cap}")
    if cap > max_cap:
        raise CapTooLarge(
            f"table cap {cap} for class {name} exceeds the configured max {max_cap}"
        )
    key = (name, cap)
    got = _TABLE_MEMO.get(key)
    if got is not None:
        return got
    path = _cache_path(_cache_root(cache_dir), name, cap)
    table: ClassTable | None = None
    if cache:
        table = _load_cache_file(path)
        if table is not None and (table.name != name or table.cap != cap):
            table = None
    if table is None:
        table = ClassTable(gclass, cap, _enumerate_members(gclass, cap))
        if cache:
            _store_cache_file(path, table)
    _TABLE_MEMO[key] = table
    return table
