"""Container codec: round-trips, stats accounting, and malformed-input rejection."""

import random

import pytest

from oracles import (
    random_planar_embedded,
    random_tree_rotations,
)
from plancode import (
    CapTooLarge,
    ChecksFailed,
    CodecError,
    GenusTooLarge,
    NotInClass,
    decode,
    encode,
    stats,
)
from plancode.bits import BitReader, BitWriter, write_segmented
from plancode.codec import _read_fix, _write_fix
from plancode.constants import FORMAT_VERSION, MAGIC
from plancode.embgraph import EmbeddedGraph, labeled_equal, triangulate
from plancode.patcher import Fix
from plancode.table import CLASS_ORDER, build_table

# K5 admits no genus-0 embedding; these rotations realize genus 1 and 2.
K5_GENUS1 = [[4, 2, 3, 1], [3, 0, 4, 2], [4, 1, 3, 0], [1, 0, 2, 4], [0, 3, 1, 2]]
K5_GENUS2 = [[u for u in range(5) if u != v] for v in range(5)]
# K7 on the torus: neighbor steps (1, 3, 2, -1, -3, -2) around every node.
K7_TORUS = [[(v + s) % 7 for s in (1, 3, 2, 6, 4, 5)] for v in range(7)]
# A shuffled K7 rotation far above the genus limit.
K7_GENUS6 = [
    [3, 4, 6, 1, 5, 2],
    [0, 2, 3, 5, 6, 4],
    [3, 6, 5, 4, 0, 1],
    [6, 1, 2, 0, 5, 4],
    [6, 3, 5, 0, 1, 2],
    [2, 3, 1, 4, 6, 0],
    [4, 2, 5, 1, 0, 3],
]


def roundtrip(g, class_name, **kw):
    """Encode, decode, and check the labeling contract; returns the result."""
    kw.setdefault("inline_table", False)
    res = encode(g, class_name, **kw)
    out = decode(res.data)
    assert labeled_equal(out, g.relabel(res.labeling))
    assert sorted(res.labeling) == list(range(g.n))
    return res


def bounded_degree_tree(n, seed, cap=5):
    rng = random.Random(seed)
    while True:
        rows = random_tree_rotations(n, rng)
        if max(len(r) for r in rows) <= cap:
            return rows


def union_rotations(parts):
    rows, offset = [], 0
    for part in parts:
        rows.extend([x + offset for x in row] for row in part)
        offset += len(part)
    return rows


# -- round-trips ------------------------------------------------------------


@pytest.mark.parametrize("n", [0, 1, 2, 4, 6])
def test_roundtrip_planar_bypass_sizes(n):
    g = random_planar_embedded(n, 0.5, random.Random(n)) if n else EmbeddedGraph.from_rotations([])
    res = roundtrip(g, "planar")
    assert res.stats.levels == ((0,) if n else ())


@pytest.mark.parametrize("n,seed", [(7, 0), (12, 1), (25, 2), (60, 3)])
def test_roundtrip_planar_pipeline(n, seed):
    g = random_planar_embedded(n, 0.5, random.Random(seed))
    res = roundtrip(g, "planar")
    assert res.stats.levels[0] >= 1


@pytest.mark.parametrize("n,seed", [(7, 4), (30, 5), (60, 6)])
def test_roundtrip_plane_connected(n, seed):
    g = random_planar_embedded(n, 0.4, random.Random(seed))
    assert g.connected
    roundtrip(g, "plane-connected")


@pytest.mark.parametrize("n,seed", [(8, 7), (20, 8), (40, 9)])
def test_roundtrip_plane_triangulation(n, seed):
    g = triangulate(random_planar_embedded(n, 0.4, random.Random(seed)))
    roundtrip(g, "plane-triangulation")


@pytest.mark.parametrize("n,seed", [(2, 10), (9, 11), (18, 12), (40, 13)])
def test_roundtrip_single_tree(n, seed):
    g = EmbeddedGraph.from_rotations(bounded_degree_tree(n, seed))
    roundtrip(g, "forest-deg5")


def test_roundtrip_forest_components():
    rows = union_rotations(
        [bounded_degree_tree(9, 21), [[]], bounded_degree_tree(12, 23)]
    )
    res = roundtrip(EmbeddedGraph.from_rotations(rows), "forest-deg5")
    assert res.stats.components == 3
    assert len(res.stats.levels) == 3


def test_roundtrip_multicomponent_planar_mixed():
    # One pipeline-sized component, one bypass-sized, one isolated node.
    g1 = random_planar_embedded(16, 0.5, random.Random(31)).to_rotations()
    g2 = random_planar_embedded(4, 0.5, random.Random(32)).to_rotations()
    g = EmbeddedGraph.from_rotations(union_rotations([g1, g2, [[]]]))
    res = roundtrip(g, "planar")
    assert sorted(res.stats.levels)[0] == 0 and sorted(res.stats.levels)[-1] >= 1


def test_roundtrip_inline_table():
    g = random_planar_embedded(25, 0.5, random.Random(40))
    res = roundtrip(g, "planar", inline_table=True)
    assert res.stats.table_bits > 1000  # the table really is in the container
    t = triangulate(random_planar_embedded(12, 0.4, random.Random(41)))
    roundtrip(t, "plane-triangulation", inline_table=True)


def test_reencode_of_decoded_graph():
    g = random_planar_embedded(30, 0.5, random.Random(50))
    first = encode(g, "planar", inline_table=False)
    d = decode(first.data)
    second = encode(d, "planar", inline_table=False)
    d2 = decode(second.data)
    assert labeled_equal(d2, d.relabel(second.labeling))


def test_encode_deterministic():
    for cls, g in [
        ("planar", random_planar_embedded(30, 0.5, random.Random(60))),
        ("plane-triangulation", triangulate(random_planar_embedded(15, 0.4, random.Random(61)))),
    ]:
        a = encode(g, cls, inline_table=False)
        b = encode(g, cls, inline_table=False)
        assert a.data == b.data and a.labeling == b.labeling


# -- stats ------------------------------------------------------------------


def layer_sum(st):
    return (
        st.header_bits
        + st.table_bits
        + st.prefix_bits
        + st.part_code_bits
        + st.fix_bits
        + st.recovery_bits
        + st.padding_bits
    )


@pytest.mark.parametrize("inline", [False, True])
def test_stats_layers_sum_to_total(inline):
    g = random_planar_embedded(35, 0.5, random.Random(70))
    res = encode(g, "planar", inline_table=inline)
    st = stats(res.data)
    assert st == res.stats
    assert layer_sum(st) == st.total_bits == 8 * len(res.data)
    assert st.padding_bits < 8
    assert st.n == g.n and st.class_name == "planar" and st.genus == 0


def test_stats_covered_nodes_and_widths():
    g = random_planar_embedded(40, 0.5, random.Random(71))
    res = encode(g, "planar", inline_table=False)
    st = res.stats
    # Parts cover the non-center nodes (center zones travel in the recovery
    # streams instead), so coverage is positive but need not reach n; fixes
    # only ever shrink a member, so coverage never exceeds the member total.
    assert 0 < st.covered_nodes <= sum(st.part_sizes)
    assert len(st.part_sizes) == len(st.part_widths)
    table = build_table("planar", 6)
    for m, w in zip(st.part_sizes, st.part_widths):
        assert w == table.width(m)
    assert st.part_code_bits == sum(st.part_widths)


def test_stats_fix_bits_present_for_patched_class():
    t = triangulate(random_planar_embedded(25, 0.4, random.Random(72)))
    res = encode(t, "plane-triangulation", inline_table=False)
    assert res.stats.fix_bits > 0
    g = random_planar_embedded(25, 0.5, random.Random(73))
    res = encode(g, "planar", inline_table=False)
    assert res.stats.fix_bits == 0


def test_levels_parameter():
    g = random_planar_embedded(80, 0.5, random.Random(74))
    auto = encode(g, "planar", inline_table=False)
    forced = encode(g, "planar", inline_table=False, levels=1)
    assert forced.stats.levels == (1,)
    assert auto.stats.levels[0] >= 1
    out = decode(forced.data)
    assert labeled_equal(out, g.relabel(forced.labeling))
    with pytest.raises(ValueError):
        encode(g, "planar", levels=0)


# -- encode-side rejection ---------------------------------------------------


def test_encode_not_in_class():
    with pytest.raises(NotInClass):
        encode(EmbeddedGraph.from_rotations(K5_GENUS1), "planar")
    star6 = EmbeddedGraph.from_rotations([[1, 2, 3, 4, 5, 6]] + [[0]] * 6)
    with pytest.raises(NotInClass):
        encode(star6, "forest-deg5")
    square = EmbeddedGraph.from_rotations([[1, 3], [0, 2], [1, 3], [2, 0]])
    with pytest.raises(NotInClass):
        encode(square, "plane-triangulation")
    two_nodes = EmbeddedGraph.from_rotations([[], []])
    with pytest.raises(NotInClass):
        encode(two_nodes, "plane-connected")


def test_encode_genus_guard_precedes_membership():
    k5 = EmbeddedGraph.from_rotations(K5_GENUS1)
    assert k5.genus() == 1
    with pytest.raises(GenusTooLarge):
        encode(k5, "planar", max_genus=0)
    with pytest.raises(NotInClass):
        encode(k5, "planar", max_genus=1)
    k7 = EmbeddedGraph.from_rotations(K7_TORUS)
    assert k7.genus() == 1
    with pytest.raises(GenusTooLarge):
        encode(k7, "planar", max_genus=0)
    high = EmbeddedGraph.from_rotations(K7_GENUS6)
    assert high.genus() == 6
    with pytest.raises(GenusTooLarge):
        encode(high, "planar")  # above the default limit


def test_encode_cap_and_table_validation():
    g = random_planar_embedded(10, 0.5, random.Random(80))
    with pytest.raises(CapTooLarge):
        encode(g, "planar", cap=13)
    table = build_table("planar", 6)
    with pytest.raises(ValueError):
        encode(g, "plane-connected", table=table)
    with pytest.raises(ValueError):
        # caps above the standard table must ship the table inline
        encode(g, "planar", cap=7, inline_table=False)


# -- decode-side rejection ----------------------------------------------------


def small_container(**kw):
    g = random_planar_embedded(12, 0.5, random.Random(90))
    return encode(g, "planar", inline_table=False, **kw).data


def craft(class_id=0, n=3, genus=0, ncomp=1, bodies=(), *, version=FORMAT_VERSION,
          magic=MAGIC, inline=None, ref_cap=6):
    """Hand-assemble a container around the given bodies (BitStrings)."""
    w = BitWriter()
    w.write_uint_bits(magic, 24)
    w.write_uint(version)
    w.write_bit(0 if inline is None else 1)
    w.write_uint(class_id)
    w.write_uint(n)
    w.write_uint(genus)
    w.write_uint(ncomp)
    if inline is None:
        w.write_uint(ref_cap)
    else:
        inline.serialize_into(w)
    if len(bodies) == 1:
        w.write_bits(bodies[0])
    elif bodies:
        write_segmented(w, list(bodies))
    return w.build().to_bytes()


def body_bits(table, g):
    """A valid single-code body for a small graph."""
    m, idx = table.index_of(g)
    w = BitWriter()
    w.write_uint(0)
    w.write_uint(m)
    w.write_uint_bits(idx, table.width(m))
    return w.build()


def test_decode_bad_magic_version_class():
    with pytest.raises(CodecError):
        decode(craft(magic=MAGIC ^ 1))
    with pytest.raises(CodecError):
        decode(craft(version=FORMAT_VERSION + 1))
    with pytest.raises(CodecError):
        decode(craft(class_id=len(CLASS_ORDER)))


def test_decode_truncated_everywhere():
    data = small_container()
    for k in range(len(data)):
        with pytest.raises(CodecError):
            decode(data[:k])


def test_decode_bit_flips_never_crash():
    data = small_container()
    for bitpos in range(8 * len(data)):
        mutated = bytearray(data)
        mutated[bitpos // 8] ^= 0x80 >> (bitpos % 8)
        try:
            decode(bytes(mutated))
        except CodecError:
            pass  # rejection is the expected outcome


def test_decode_header_count_mismatches():
    table = build_table("planar", 6)
    p3 = EmbeddedGraph.from_rotations([[1], [0, 2], [1]])
    body = body_bits(table, p3)
    assert decode(craft(n=3, bodies=(body,))).n == 3
    with pytest.raises(CodecError):
        decode(craft(n=4, bodies=(body,)))  # node count lies
    with pytest.raises(CodecError):
        decode(craft(n=3, genus=1, bodies=(body,)))  # genus lies
    with pytest.raises(CodecError):
        decode(craft(n=3, ncomp=0, bodies=(body,)))  # components inconsistent
    with pytest.raises(CodecError):
        decode(craft(n=0, ncomp=1, bodies=(body,)))
    with pytest.raises(CodecError):
        decode(craft(n=6, ncomp=3, bodies=(body, body)))  # segment count lies


def test_decode_body_field_ranges():
    table = build_table("planar", 6)

    def body(*writes):
        w = BitWriter()
        for kind, val in writes:
            if kind == "uint":
                w.write_uint(val)
            else:
                w.write_uint_bits(*val)
        return w.build()

    with pytest.raises(CodecError):  # member size above the cap
        decode(craft(n=7, bodies=(body(("uint", 0), ("uint", 7)),)))
    with pytest.raises(CodecError):  # member index out of range
        bad = body(("uint", 0), ("uint", 5), ("bits", (table.num(5), table.width(5))))
        decode(craft(n=5, bodies=(bad,)))
    with pytest.raises(CodecError):  # level count out of range
        decode(craft(n=9, bodies=(body(("uint", 65),),)))
    with pytest.raises(CodecError):  # a level with zero parts
        decode(craft(n=9, bodies=(body(("uint", 1), ("uint", 0)),)))


def test_decode_disconnected_member_rejected():
    table = build_table("planar", 6)
    two_isolated = EmbeddedGraph.from_rotations([[], []])
    body = body_bits(table, two_isolated)
    with pytest.raises(CodecError):
        decode(craft(n=2, bodies=(body,)))


def test_decode_trailing_data_rejected():
    data = small_container()
    with pytest.raises(CodecError):
        decode(data + b"\x00")  # eight zero bits cannot be padding
    st = stats(data)
    if st.padding_bits:  # make a padding bit nonzero
        mutated = bytearray(data)
        mutated[-1] |= 1
        with pytest.raises(CodecError):
            decode(bytes(mutated))


def test_decode_trailing_bits_inside_segmented_body():
    table = build_table("planar", 6)
    p2 = EmbeddedGraph.from_rotations([[1], [0]])
    good = body_bits(table, p2)
    w = BitWriter()
    w.write_bits(good)
    w.write_bit(0)
    padded = w.build()
    with pytest.raises(CodecError):
        decode(craft(n=4, ncomp=2, bodies=(padded, good)))
    assert decode(craft(n=4, ncomp=2, bodies=(good, good))).n == 4


def test_decode_table_section_guards():
    with pytest.raises(CodecError):
        # anything above the standard cap is refused, even the next size up:
        # a container must never trigger expensive enumeration
        decode(craft(ref_cap=7, bodies=()))
    with pytest.raises(CodecError):
        decode(craft(ref_cap=0, bodies=()))
    other = build_table("plane-connected", 6)
    p3 = EmbeddedGraph.from_rotations([[1], [0, 2], [1]])
    body = body_bits(other, p3)
    with pytest.raises(CodecError):  # header says planar, table says otherwise
        decode(craft(class_id=0, n=3, inline=other, bodies=(body,)))


# -- fix wire format ----------------------------------------------------------


def fix_bits(fix, m):
    w = BitWriter()
    _write_fix(w, fix, m)
    return w.build()


def test_fix_wire_roundtrip():
    cases = [
        (Fix(), 5),
        (Fix((3, 4), ()), 5),
        (Fix((), ((0, 1), (0, 2))), 4),
        (Fix((6, 7), ((0, 1), (1, 5))), 8),
    ]
    for fix, m in cases:
        r = BitReader(fix_bits(fix, m))
        assert _read_fix(r, m) == fix
        assert r.remaining == 0


def test_fix_wire_rejections():
    def raw(m, na, ne, labels):
        w = BitWriter()
        w.write_uint(na)
        w.write_uint(ne)
        lw = max(m - 1, 0).bit_length()
        for v in labels:
            w.write_uint_bits(v, lw)
        return BitReader(w.build())

    with pytest.raises(CodecError):
        _read_fix(raw(5, 6, 0, [0, 1, 2, 3, 4, 4]), 5)  # too many nodes
    with pytest.raises(CodecError):
        _read_fix(raw(5, 1, 0, [5]), 5)  # label out of range (width allows it)
    with pytest.raises(CodecError):
        _read_fix(raw(5, 2, 0, [3, 2]), 5)  # nodes not ascending
    with pytest.raises(CodecError):
        _read_fix(raw(5, 0, 1, [2, 1]), 5)  # edge not (small, large)
    with pytest.raises(CodecError):
        _read_fix(raw(5, 0, 2, [0, 1, 0, 1]), 5)  # duplicate edge
    with pytest.raises(CodecError):
        _read_fix(raw(5, 1, 1, [2, 1, 2]), 5)  # edge at a deleted node
    with pytest.raises(CodecError):
        _read_fix(raw(5, 1, 0, []), 5)  # truncated


def test_class_ids_are_stable():
    assert CLASS_ORDER == (
        "planar",
        "plane-connected",
        "plane-triangulation",
        "forest-deg5",
    )
