"""Reassembly of coarse part graphs from finer ones, one hierarchy level at a time.

A separation hierarchy cuts the host graph into nested node sets.  At each
level the encoder stores, per coarse piece, just enough to rebuild that piece
from its already-decoded finer pieces:

* a **skeleton**: the rotation rows of the kernel nodes (nodes of the piece
  that belong to no finer part) and of the piece's outside boundary,
  restricted to edges that do not enter a finer part;
* a **boundary map** per finer part, naming which coarse node each of the
  part's boundary nodes is; and
* **splice triples** ``(x, a, b)`` that say how the rotation fragments of a
  node ``x`` — one fragment per finer part that borders ``x`` plus its
  skeleton row — interleave into x's single cyclic rotation: ``a`` ends a
  contiguous run and ``b`` starts the next.

Every piece uses one label space with three zones: kernel nodes first
(ascending host id), then interiors of the finer parts (part index then fine
label, ascending), then the outside boundary (ascending host id).  Label
width for a piece of ``node`` nodes is ``bitlen(node - 1)``.

Per-piece stream layout (all widths derivable in read order)::

    uint(#parts) uint(#kernel) uint(#interior) uint(#boundary)
    for each kernel/boundary node: uint(deg) deg x label
    for each part: uint(#rows) rows of (fine-label, coarse-label)
    uint(#triples) triples of (x, a, b)

A level's stream is ``uint(#pieces)`` followed by the pieces in order.
Decoding returns honestly embedded graphs: rows must pair up into a valid
rotation system or the stream is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bits import BitReader, BitString, BitWriter
from .constants import MAX_NODES
from .embgraph import EmbeddedGraph
from .errors import ChecksFailed, CodecError, InvalidEmbedding
from .separation import Separation

__all__ = ["PartView", "encode_level", "decode_level", "decode_level_from"]


def _label_width(count: int) -> int:
    """Bits needed to address ``count`` distinct labels (0 when count <= 1)."""
    return max(count - 1, 0).bit_length()


def _anchor(row: list[int]) -> list[int]:
    """Rotate a cyclic list to start at its smallest entry (determinism only)."""
    if not row:
        return row
    i = row.index(min(row))
    return row[i:] + row[:i]


@dataclass(frozen=True)
class PartView:
    """A part graph together with its place in the host.

    ``graph`` is the embedded part graph, ``boundary`` the local labels of its
    outside-boundary nodes, and ``ids`` the host node id of each local label.
    """

    graph: EmbeddedGraph
    boundary: frozenset
    ids: list

    def __post_init__(self) -> None:
        n = self.graph.n
        if len(self.ids) != n or len(set(self.ids)) != n:
            raise ValueError("ids must name each local label exactly once")
        if not all(0 <= b < n for b in self.boundary):
            raise ValueError("boundary labels out of range")

    def interior(self) -> list:
        """Local labels of non-boundary nodes, ascending."""
        return [v for v in range(self.graph.n) if v not in self.boundary]


def encode_level(
    g: EmbeddedGraph,
    prev: Separation,
    sep: Separation,
    views: list,
) -> tuple[BitString, list]:
    """Encode one hierarchy level of ``g``.

    ``sep`` refines ``prev`` on the same host; ``views[i]`` is the PartView of
    ``sep.parts[i + 1]`` *in g*.  Returns the level's bits and the PartViews
    of ``prev``'s parts, which feed the next (coarser) level.
    """
    if prev.host.n != g.n or sep.host.n != g.n:
        raise ChecksFailed("separations and graph disagree on node count")
    if len(views) != sep.p:
        raise ChecksFailed("need exactly one view per fine part")
    groups: list = [[] for _ in range(prev.p + 1)]
    last = 0
    for i in range(1, sep.p + 1):
        j = sep.prev_part[i]
        if not 1 <= j <= prev.p or j < last:
            raise ChecksFailed("fine parts must be grouped by coarse part, in order")
        last = j
        groups[j].append(i)
    center = set(sep.parts[0])
    w = BitWriter()
    w.write_uint(prev.p)
    out = []
    for j in range(1, prev.p + 1):
        items = [(views[i - 1], sep.parts[i]) for i in groups[j]]
        out.append(_encode_piece(w, g, prev.parts[j], center, items))
    return w.build(), out


def _encode_piece(
    w: BitWriter,
    g: EmbeddedGraph,
    u_nodes: list,
    center: set,
    items: list,
) -> PartView:
    """Encode one coarse piece and return its PartView."""
    u_set = set(u_nodes)
    w_ids = sorted(v for v in u_nodes if v in center)
    int_ids: list = []
    int_part: list = []
    for q, (pv, part_nodes) in enumerate(items):
        pset = set(part_nodes)
        if not pset <= u_set:
            raise ChecksFailed("fine part leaks outside its coarse part")
        ib = pv.interior()
        if {pv.ids[v] for v in ib} != pset:
            raise ChecksFailed("view interior does not match its part")
        if {pv.ids[v] for v in pv.boundary} != g.neighbors_of_set(pset):
            raise ChecksFailed("view boundary does not match the part's neighborhood")
        int_ids.extend(pv.ids[v] for v in ib)
        int_part.extend([q] * len(ib))
    nw, nv = len(w_ids), len(int_ids)
    if len(set(w_ids) | set(int_ids)) != nw + nv or set(w_ids) | set(int_ids) != u_set:
        raise ChecksFailed("kernel and part interiors must partition the piece")
    nbr_ids = sorted(g.neighbors_of_set(u_set))
    ids = w_ids + int_ids + nbr_ids
    label_of = {h: i for i, h in enumerate(ids)}
    nb = len(nbr_ids)
    node = nw + nv + nb
    width = _label_width(node)
    w.write_uint(len(items))
    w.write_uint(nw)
    w.write_uint(nv)
    w.write_uint(nb)

    # Full restricted rotations of kernel and boundary nodes in this piece.
    rows: dict = {}
    for xl, x in [(label_of[h], h) for h in w_ids + nbr_ids]:
        rot = []
        d0 = g.min_dart_at(x)
        if d0 >= 0:
            for d in g.rotation_from(d0):
                yl = label_of.get(g.head(d))
                if xl < nw:
                    if yl is None:
                        raise ChecksFailed("kernel node has a neighbor outside the piece")
                    rot.append(yl)
                elif yl is not None and yl < nw + nv:
                    rot.append(yl)
        rows[xl] = rot

    # Skeleton rows: the restricted rotations with part-interior entries dropped.
    for h in w_ids + nbr_ids:
        xl = label_of[h]
        skel = _anchor([y for y in rows[xl] if not nw <= y < nw + nv])
        w.write_uint(len(skel))
        for y in skel:
            w.write_uint_bits(y, width)

    # Boundary map of each fine part into the piece's label space.
    for pv, _ in items:
        fw = _label_width(pv.graph.n)
        blabels = sorted(pv.boundary)
        w.write_uint(len(blabels))
        for bl in blabels:
            cl = label_of.get(pv.ids[bl])
            if cl is None or nw <= cl < nw + nv:
                raise ChecksFailed("part boundary node is interior to a sibling part")
            w.write_uint_bits(bl, fw)
            w.write_uint_bits(cl, width)

    # Splice triples: cyclic cell changes in each kernel/boundary rotation.
    def cell(y: int) -> int:
        return int_part[y - nw] if nw <= y < nw + nv else -1

    triples = []
    for h in w_ids + nbr_ids:
        xl = label_of[h]
        rot = rows[xl]
        if rot and len({cell(y) for y in rot}) > 1:
            for i, a in enumerate(rot):
                b = rot[(i + 1) % len(rot)]
                if cell(a) != cell(b):
                    triples.append((xl, a, b))
    triples.sort()
    w.write_uint(len(triples))
    for x, a, b in triples:
        w.write_uint_bits(x, width)
        w.write_uint_bits(a, width)
        w.write_uint_bits(b, width)

    # Assemble the coarse part graph in the piece's own label space.
    rot_rows: list = [None] * node
    for h in w_ids + nbr_ids:
        xl = label_of[h]
        rot_rows[xl] = rows[xl]
    pos = nw
    for pv, _ in items:
        fr = pv.graph.to_rotations()
        cof = [0] * pv.graph.n
        for v in range(pv.graph.n):
            if v in pv.boundary:
                cof[v] = label_of[pv.ids[v]]
            else:
                cof[v] = pos
                pos += 1
        for v in range(pv.graph.n):
            if v not in pv.boundary:
                rot_rows[cof[v]] = [cof[y] for y in fr[v]]
    try:
        graph = EmbeddedGraph.from_rotations(rot_rows)
    except InvalidEmbedding as exc:
        raise ChecksFailed(f"assembled piece has no valid embedding: {exc}") from exc
    return PartView(graph, frozenset(range(nw + nv, node)), ids)


def decode_level(bits: BitString, fine_graphs: list) -> list:
    """Rebuild one level's coarse part graphs from its bits and fine graphs.

    ``fine_graphs`` are the decoded finer part graphs in emission order; the
    returned list holds one embedded graph per coarse piece, each in the
    piece's three-zone label space.
    """
    r = BitReader(bits)
    out = decode_level_from(r, fine_graphs)
    if r.remaining:
        raise CodecError("trailing bits after recovery data")
    return out


def decode_level_from(r: BitReader, fine_graphs: list) -> list:
    """Like decode_level, but consumes exactly one level's stream from an
    open reader, leaving any following bits for the caller."""
    npieces = r.read_uint()
    if npieces < 1 or npieces > MAX_NODES:
        raise CodecError("piece count out of range")
    out = []
    cursor = 0
    for _ in range(npieces):
        graph, used = _decode_piece(r, fine_graphs, cursor)
        out.append(graph)
        cursor += used
    if cursor != len(fine_graphs):
        raise CodecError("leftover fine part graphs")
    return out


def _decode_piece(
    r: BitReader, fine_graphs: list, cursor: int
) -> tuple[EmbeddedGraph, int]:
    ni = r.read_uint()
    nw = r.read_uint()
    nv = r.read_uint()
    nb = r.read_uint()
    if max(ni, nw, nv, nb) > MAX_NODES:
        raise CodecError("piece size out of range")
    if cursor + ni > len(fine_graphs):
        raise CodecError("missing fine part graphs")
    parts = fine_graphs[cursor : cursor + ni]
    node = nw + nv + nb
    width = _label_width(node)

    skel = []
    for idx in range(nw + nb):
        xl = idx if idx < nw else nw + nv + (idx - nw)
        deg = r.read_uint()
        if deg > max(node - 1, 0):
            raise CodecError("skeleton degree exceeds piece size")
        row = [r.read_uint_bits(width) for _ in range(deg)]
        for y in row:
            if y >= node or y == xl:
                raise CodecError("skeleton label out of range")
            if xl < nw:
                if nw <= y < nw + nv:
                    raise CodecError("kernel skeleton row points into a part")
            elif y >= nw:
                raise CodecError("boundary skeleton row must point at kernel nodes")
        skel.append((xl, row))

    cof = []
    cells_at: dict = {}
    int_pairs = []
    sum_v = 0
    for qi, fg in enumerate(parts):
        nq = fg.n
        fw = _label_width(nq)
        b = r.read_uint()
        if b > nq:
            raise CodecError("part boundary larger than the part")
        m: dict = {}
        used = set()
        prev_f = -1
        for _ in range(b):
            f = r.read_uint_bits(fw)
            cl = r.read_uint_bits(width)
            if f <= prev_f or f >= nq:
                raise CodecError("part boundary rows must ascend")
            prev_f = f
            if cl >= node or nw <= cl < nw + nv:
                raise CodecError("part boundary maps to an interior label")
            if cl in used:
                raise CodecError("two part nodes map to one coarse node")
            used.add(cl)
            m[f] = cl
            cells_at.setdefault(cl, []).append((qi, f))
        sum_v += nq - b
        int_pairs.extend((qi, f) for f in range(nq) if f not in m)
        cof.append(m)
    if sum_v != nv:
        raise CodecError("part interiors do not fill the piece")
    int_part = [0] * nv
    for rank, (qi, f) in enumerate(int_pairs):
        cof[qi][f] = nw + rank
        int_part[rank] = qi

    t = r.read_uint()
    if width == 0 and t:
        raise CodecError("splice triples in a one-node piece")
    ends: dict = {}
    prev_key = None
    for _ in range(t):
        x = r.read_uint_bits(width)
        a = r.read_uint_bits(width)
        b2 = r.read_uint_bits(width)
        if x >= node or nw <= x < nw + nv:
            raise CodecError("splice triple on an interior node")
        if a >= node or b2 >= node:
            raise CodecError("splice label out of range")
        key = (x, a)
        if prev_key is not None and key <= prev_key:
            raise CodecError("splice triples must ascend")
        prev_key = key
        ends.setdefault(x, {})[a] = b2

    rot: list = [None] * node
    part_rot = [fg.to_rotations() for fg in parts]
    for qi, fg in enumerate(parts):
        mq = cof[qi]
        for f in range(fg.n):
            cl = mq[f]
            if nw <= cl < nw + nv:
                rot[cl] = [mq[y] for y in part_rot[qi][f]]
    for xl, wrow in skel:
        cells = [wrow] if wrow else []
        for qi, f in cells_at.get(xl, ()):
            sub = [cof[qi][y] for y in part_rot[qi][f]]
            if not sub:
                raise CodecError("boundary row for an isolated part node")
            cells.append(sub)
        rot[xl] = _splice(cells, ends.get(xl))
    try:
        graph = EmbeddedGraph.from_rotations(rot)
    except InvalidEmbedding as exc:
        raise CodecError(f"recovered rotations are not an embedding: {exc}") from exc
    return graph, ni


def _splice(cells: list, ends: dict | None) -> list:
    """Interleave cyclic rotation fragments into one cycle, following ``ends``.

    ``ends`` maps run-ending labels to the label starting the next run.  Each
    cell is cut at its run ends; the runs must chain into a single cycle that
    uses every run exactly once.
    """
    if not cells:
        if ends:
            raise CodecError("splice triples on an empty rotation")
        return []
    if ends is None:
        if len(cells) > 1:
            raise CodecError("multiple rotation cells without splice triples")
        return list(cells[0])
    if len(cells) == 1:
        raise CodecError("splice triples on a single-cell rotation")
    runs: list = []
    start_at: dict = {}
    for cell in cells:
        size = len(cell)
        epos = [i for i, y in enumerate(cell) if y in ends]
        if not epos:
            raise CodecError("rotation cell without a run end")
        for k, e in enumerate(epos):
            s = (epos[k - 1] + 1) % size
            run = cell[s : e + 1] if s <= e else cell[s:] + cell[: e + 1]
            if run[0] in start_at:
                raise CodecError("ambiguous splice run start")
            start_at[run[0]] = len(runs)
            runs.append(run)
    if len(runs) != len(ends):
        raise CodecError("splice triple count mismatch")
    out: list = []
    idx = 0
    seen = set()
    for _ in range(len(runs)):
        if idx in seen:
            raise CodecError("splice runs revisit a fragment")
        seen.add(idx)
        run = runs[idx]
        out.extend(run)
        nxt = start_at.get(ends[run[-1]])
        if nxt is None:
            raise CodecError("splice continues at a non-run start")
        idx = nxt
    if idx != 0:
        raise CodecError("splice runs do not close a single cycle")
    return out
