"""Container codec: whole graphs to bytes and back.

The encoder cuts each component of the input along a nested separation
hierarchy, encodes the finest parts as indices into a class table (completed
into members by a patcher where the class needs it, with the fix serialized
alongside), and stores one recovery stream per hierarchy level that splices
the parts back together.  The decoder needs no separation machinery: it
rebuilds the fine part graphs from the table and the fixes, then replays the
recovery streams level by level.

Container layout (bit-level; every field is self-delimiting in read order)::

    magic(24) uint(version) inline_flag(1) uint(class) uint(n) uint(genus)
    uint(components) TABLE BODIES zero-padding-to-byte

    TABLE  = serialized class table        (inline_flag = 1)
           | uint(cap)                     (inline_flag = 0; decoder builds it)
    BODIES = nothing                       (0 components)
           | BODY                          (1 component)
           | segmented concat of BODYs     (else, in ascending min-node order)
    BODY   = uint(0) uint(m) index         (component small enough for one code)
           | uint(K) uint(P) P x PART, then K level streams, finest first
    PART   = uint(m) index [FIX]           (FIX only for patched classes)
    FIX    = uint(a) uint(e) a x label, e x (label label)
             labels are bitlen(m-1) wide; nodes ascending, edges (small,
             large) lexicographically ascending

Decoding returns the graph under its *decoded* labeling — the composition of
the per-level zone labelings, with components laid out one after another.
The encoder cannot afford to store the input labeling (that alone costs
n log n bits), so ``encode`` returns it as side metadata instead: the
contract is ``decode(result.data) == g.relabel(result.labeling)``, exactly.

``stats`` re-parses a container and reports where its bits went, layer by
layer, from the actual stream — not from a re-encode.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bits import BitReader, BitString, BitWriter, read_segmented, write_segmented
from .constants import (
    BYPASS_CAP,
    DEFAULT_MAX_GENUS,
    FORMAT_VERSION,
    MAGIC,
    MAX_LEVELS,
    MAX_NODES,
)
from .embgraph import EmbeddedGraph, canonical_labeling, triangulate
from .errors import (
    ChecksFailed,
    CapTooLarge,
    CodecError,
    GenusTooLarge,
    NotInClass,
)
from .patcher import EMPTY_FIX, Fix, apply_fix, complete
from .recovery import PartView, decode_level_from, encode_level
from .separation import build_separations, level_schedule
from .table import CLASS_ORDER, ClassTable, build_table, get_class

__all__ = ["EncodeResult", "Stats", "decode", "encode", "stats"]

# Largest table cap the encoder will enumerate at all.
_MAX_TABLE_CAP = 12


@dataclass(frozen=True)
class Stats:
    """Where a container's bits went, from parsing the actual stream.

    ``part_sizes``/``part_widths`` list every table code written (member node
    count and index width), across all components, bypassed components
    included.  ``covered_nodes`` sums the node counts of the fine part graphs
    those codes (after fixes) decode to.  ``levels`` is the level count per
    component body (0 = single table code).
    """

    n: int
    class_name: str
    genus: int
    components: int
    levels: tuple[int, ...]
    part_sizes: tuple[int, ...]
    part_widths: tuple[int, ...]
    covered_nodes: int
    header_bits: int
    table_bits: int
    prefix_bits: int
    part_code_bits: int
    fix_bits: int
    recovery_bits: int
    padding_bits: int
    total_bits: int


@dataclass(frozen=True)
class EncodeResult:
    """A container plus the input-to-decoded node labeling and its stats."""

    data: bytes
    labeling: list[int]
    stats: Stats


def _label_width(count: int) -> int:
    return max(count - 1, 0).bit_length()


# -- encoding -------------------------------------------------------------------


def encode(
    g: EmbeddedGraph,
    class_name: str,
    *,
    cap: int | None = None,
    table: ClassTable | None = None,
    inline_table: bool = True,
    max_genus: int = DEFAULT_MAX_GENUS,
    levels: int | None = None,
    cache_dir=None,
) -> EncodeResult:
    """Encode an embedded graph as a member of the named class.

    Raises GenusTooLarge when the embedding's genus exceeds ``max_genus``,
    NotInClass when the graph fails the class predicate, and CapTooLarge when
    ``cap`` exceeds what table enumeration supports.  ``levels`` forces the
    number of hierarchy levels per component (the finest levels of the
    automatic schedule are kept); ``table`` supplies a prebuilt class table
    and overrides ``cap``.
    """
    cls = get_class(class_name)
    genus = g.genus()
    if genus > max_genus:
        raise GenusTooLarge(
            f"embedding has genus {genus}, above the limit {max_genus}"
        )
    if not cls.member(g):
        raise NotInClass(f"graph is not a member of class {class_name}")
    if levels is not None and levels < 1:
        raise ValueError("levels must be >= 1")
    if table is None:
        if cap is None:
            cap = BYPASS_CAP[class_name]
        if cap > _MAX_TABLE_CAP:
            raise CapTooLarge(f"table cap {cap} above the supported {_MAX_TABLE_CAP}")
        table = build_table(class_name, cap, max_cap=cap, cache_dir=cache_dir)
    elif table.name != class_name:
        raise ValueError(
            f"table is for class {table.name}, not {class_name}"
        )
    if not inline_table and table.cap > BYPASS_CAP[class_name]:
        # A by-reference container may only name the standard table — the
        # decoder refuses to enumerate anything bigger on untrusted input.
        raise ValueError(
            f"cap {table.cap} exceeds the by-reference limit "
            f"{BYPASS_CAP[class_name]} for {class_name}; use inline_table=True"
        )

    comps = g.components()
    labeling = [0] * g.n
    bodies: list[BitString] = []
    offset = 0
    for nodes in comps:
        sub, ids = g.induced(nodes)
        body, lab_local = _encode_body(sub, cls, table, levels)
        bodies.append(body)
        for local, node in enumerate(ids):
            labeling[node] = offset + lab_local[local]
        offset += sub.n

    w = BitWriter()
    w.write_uint_bits(MAGIC, 24)
    w.write_uint(FORMAT_VERSION)
    w.write_bit(1 if inline_table else 0)
    w.write_uint(CLASS_ORDER.index(class_name))
    w.write_uint(g.n)
    w.write_uint(genus)
    w.write_uint(len(comps))
    if inline_table:
        table.serialize_into(w)
    else:
        w.write_uint(table.cap)
    if len(bodies) == 1:
        w.write_bits(bodies[0])
    elif bodies:
        write_segmented(w, bodies)
    data = w.build().to_bytes()
    return EncodeResult(data, labeling, stats(data, cache_dir=cache_dir))


def _encode_body(
    sub: EmbeddedGraph, cls, table: ClassTable, levels: int | None
) -> tuple[BitString, list[int]]:
    """One connected component: either a single table code or the pipeline.
    Returns (body bits, local labeling to the decoded layout)."""
    w = BitWriter()
    if sub.n <= table.cap:
        m, idx = _member_index(table, sub)
        w.write_uint(0)
        w.write_uint(m)
        w.write_uint_bits(idx, table.width(m))
        return w.build(), canonical_labeling(sub)

    schedule = None
    if levels is not None:
        full = level_schedule(sub.n)
        schedule = full[-min(levels, len(full)) :]
    seps = build_separations(triangulate(sub), schedule)
    nlevels = len(seps) - 1
    parts = seps[-1].parts[1:]
    views: list[PartView] = []
    records: list[tuple[int, int, Fix]] = []
    for part in parts:
        view, record = _encode_part(sub, part, cls, table)
        views.append(view)
        records.append(record)

    w.write_uint(nlevels)
    w.write_uint(len(parts))
    for m, idx, fix in records:
        w.write_uint(m)
        w.write_uint_bits(idx, table.width(m))
        if cls.patch != "none":
            _write_fix(w, fix, m)
    for k in range(nlevels, 0, -1):
        bits, views = encode_level(sub, seps[k - 1], seps[k], views)
        w.write_bits(bits)

    top = views[0]
    lab_local = [0] * sub.n
    for pos, node in enumerate(top.ids):
        lab_local[node] = pos
    return w.build(), lab_local


def _encode_part(
    sub: EmbeddedGraph, part: list[int], cls, table: ClassTable
) -> tuple[PartView, tuple[int, int, Fix]]:
    """Turn one finest-level part into (recovery view, table record).

    The part graph is completed into a class member, canonically relabeled
    for the table lookup, and the fix translated along.  The view's fine
    graph is exactly what the decoder will rebuild: the member with the fix
    applied, under compacted member labels.
    """
    pg = sub.part_graph(part)
    if cls.patch == "star":
        inner, _ids = sub.induced(set(pg.ids))
        h, fix = complete(inner, pg.boundary, "star")
    else:
        h, fix = complete(pg.graph, pg.boundary, cls.patch)
    lab = canonical_labeling(h)
    member = h.relabel(lab)
    m, idx = _member_index(table, member)
    mfix = fix.relabeled(lab)
    fine = apply_fix(member, mfix) if not mfix.is_empty else member
    if fine.n != pg.graph.n:
        raise ChecksFailed("fix does not restore the part graph's node count")
    added = set(mfix.added_nodes)
    rank = {}
    for x in range(member.n):
        if x not in added:
            rank[x] = len(rank)
    ids_v = [0] * fine.n
    boundary = set()
    for local in range(pg.graph.n):
        fl = rank[lab[local]]
        ids_v[fl] = pg.ids[local]
        if local in pg.boundary:
            boundary.add(fl)
    return PartView(fine, frozenset(boundary), ids_v), (m, idx, mfix)


def _member_index(table: ClassTable, g: EmbeddedGraph) -> tuple[int, int]:
    try:
        return table.index_of(g)
    except (NotInClass, CapTooLarge) as exc:
        raise ChecksFailed(f"pipeline produced an unusable table member: {exc}") from exc


def _write_fix(w: BitWriter, fix: Fix, m: int) -> None:
    lw = _label_width(m)
    w.write_uint(len(fix.added_nodes))
    w.write_uint(len(fix.deleted_edges))
    for v in fix.added_nodes:
        w.write_uint_bits(v, lw)
    for u, v in fix.deleted_edges:
        w.write_uint_bits(u, lw)
        w.write_uint_bits(v, lw)


# -- decoding -------------------------------------------------------------------


def decode(data: bytes, *, verify_table: bool = False, cache_dir=None) -> EmbeddedGraph:
    """Decode a container back to its embedded graph (decoded labeling).

    Raises CodecError on any malformation: every count, label, index, and
    stream is validated, and the decoded graph must satisfy the container's
    class predicate, node count, component count, and genus.
    """
    graph, _st = _parse(data, verify_table, cache_dir)
    return graph


def stats(data: bytes, *, cache_dir=None) -> Stats:
    """Parse a container and report its exact bit layout (see Stats)."""
    _graph, st = _parse(data, False, cache_dir)
    return st


def _parse(data: bytes, verify_table: bool, cache_dir) -> tuple[EmbeddedGraph, Stats]:
    bits = BitString.from_bytes(data, 8 * len(data))
    r = BitReader(bits)
    acc = {
        "header": 0,
        "table": 0,
        "part_code": 0,
        "fix": 0,
        "recovery": 0,
        "levels": [],
        "part_sizes": [],
        "part_widths": [],
        "covered": 0,
    }
    try:
        if r.read_uint_bits(24) != MAGIC:
            raise CodecError("bad magic")
        if r.read_uint() != FORMAT_VERSION:
            raise CodecError("unsupported container version")
        inline = r.read_bit()
        class_id = r.read_uint()
        if class_id >= len(CLASS_ORDER):
            raise CodecError(f"unknown graph class id {class_id}")
        class_name = CLASS_ORDER[class_id]
        cls = get_class(class_name)
        n = r.read_uint()
        if n > MAX_NODES:
            raise CodecError("node count out of range")
        genus = r.read_uint()
        if genus > MAX_NODES:
            raise CodecError("genus out of range")
        ncomp = r.read_uint()
        if (ncomp == 0) != (n == 0) or ncomp > max(n, 1):
            raise CodecError("component count inconsistent with node count")
        acc["header"] = r.pos

        mark = r.pos
        if inline:
            table = ClassTable.deserialize_from(r, verify=verify_table)
            if table.name != class_name:
                raise CodecError("inline table is for a different class")
        else:
            cap = r.read_uint()
            # Only the standard table may be demanded by reference: building
            # it is cheap and cached, so a hostile container cannot make the
            # decoder enumerate a large class. Bigger tables travel inline.
            if not 1 <= cap <= BYPASS_CAP[class_name]:
                raise CodecError(f"referenced table cap {cap} unsupported")
            table = build_table(class_name, cap, max_cap=cap, cache_dir=cache_dir)
        acc["table"] = r.pos - mark

        pieces: list[EmbeddedGraph] = []
        if ncomp == 1:
            pieces.append(_decode_body(r, cls, table, acc))
        elif ncomp > 1:
            bodies = read_segmented(r)
            if len(bodies) != ncomp:
                raise CodecError("segment count does not match component count")
            for body in bodies:
                br = BitReader(body)
                pieces.append(_decode_body(br, cls, table, acc))
                if br.remaining:
                    raise CodecError("trailing bits in component body")

        pad = r.remaining
        if pad >= 8 or (pad and r.read_uint_bits(pad) != 0):
            raise CodecError("trailing data after container")

        graph = _disjoint_union(pieces)
        if graph.n != n:
            raise CodecError("decoded node count does not match the header")
        if graph.genus() != genus:
            raise CodecError("decoded genus does not match the header")
        if not cls.member(graph):
            raise CodecError("decoded graph fails the class predicate")
    except CodecError:
        raise
    except IndexError as exc:
        # BitReader raises CodecError on past-end reads; IndexError here means
        # a count sent a lookup out of range before validation caught it.
        raise CodecError(f"malformed container: {exc}") from exc

    total = len(bits)
    st = Stats(
        n=n,
        class_name=class_name,
        genus=genus,
        components=ncomp,
        levels=tuple(acc["levels"]),
        part_sizes=tuple(acc["part_sizes"]),
        part_widths=tuple(acc["part_widths"]),
        covered_nodes=acc["covered"],
        header_bits=acc["header"],
        table_bits=acc["table"],
        # Everything that is not payload, table, header, or padding: segment
        # framing, level/part counts, and member size headers.
        prefix_bits=total
        - acc["header"]
        - acc["table"]
        - acc["part_code"]
        - acc["fix"]
        - acc["recovery"]
        - pad,
        part_code_bits=acc["part_code"],
        fix_bits=acc["fix"],
        recovery_bits=acc["recovery"],
        padding_bits=pad,
        total_bits=total,
    )
    return graph, st


def _decode_body(r: BitReader, cls, table: ClassTable, acc: dict) -> EmbeddedGraph:
    nlevels = r.read_uint()
    if nlevels > MAX_LEVELS:
        raise CodecError("level count out of range")
    acc["levels"].append(nlevels)
    if nlevels == 0:
        m = _read_member_size(r, table)
        graph = _read_member(r, table, m, acc)
        acc["covered"] += graph.n
        if not graph.connected:
            raise CodecError("component body decodes to a disconnected graph")
        return graph

    npieces = r.read_uint()
    if not 1 <= npieces <= MAX_NODES:
        raise CodecError("part count out of range")
    fines: list[EmbeddedGraph] = []
    for _ in range(npieces):
        m = _read_member_size(r, table)
        member = _read_member(r, table, m, acc)
        if cls.patch != "none":
            mark = r.pos
            fix = _read_fix(r, m)
            acc["fix"] += r.pos - mark
            fine = apply_fix(member, fix)
        else:
            fine = member
        acc["covered"] += fine.n
        fines.append(fine)

    mark = r.pos
    for _ in range(nlevels):
        fines = decode_level_from(r, fines)
    acc["recovery"] += r.pos - mark
    if len(fines) != 1:
        raise CodecError("body does not reduce to a single piece")
    piece = fines[0]
    if not piece.connected:
        raise CodecError("component body decodes to a disconnected graph")
    return piece


def _read_member_size(r: BitReader, table: ClassTable) -> int:
    m = r.read_uint()
    if not 1 <= m <= table.cap:
        raise CodecError(f"member size {m} outside the table range")
    return m


def _read_member(r: BitReader, table: ClassTable, m: int, acc: dict) -> EmbeddedGraph:
    width = table.width(m)
    idx = r.read_uint_bits(width)
    acc["part_code"] += width
    acc["part_sizes"].append(m)
    acc["part_widths"].append(width)
    return table.member_graph(m, idx)


def _read_fix(r: BitReader, m: int) -> Fix:
    lw = _label_width(m)
    na = r.read_uint()
    ne = r.read_uint()
    if na > m or ne > m * m:
        raise CodecError("fix size out of range")
    added = []
    for _ in range(na):
        v = r.read_uint_bits(lw)
        if v >= m:
            raise CodecError("fix node label out of range")
        added.append(v)
    edges = []
    for _ in range(ne):
        u = r.read_uint_bits(lw)
        v = r.read_uint_bits(lw)
        if u >= m or v >= m:
            raise CodecError("fix edge label out of range")
        edges.append((u, v))
    try:
        return Fix(tuple(added), tuple(edges))
    except ValueError as exc:
        raise CodecError(f"malformed fix: {exc}") from exc


def _disjoint_union(graphs: list[EmbeddedGraph]) -> EmbeddedGraph:
    if len(graphs) == 1:
        return graphs[0]
    rows: list[list[int]] = []
    offset = 0
    for g in graphs:
        for row in g.to_rotations():
            rows.append([x + offset for x in row])
        offset += g.n
    return EmbeddedGraph.from_rotations(rows)
