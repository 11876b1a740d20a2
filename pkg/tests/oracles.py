"""Brute-force reference implementations used to validate the real ones.

Everything here is deliberately naive and written independently of the
library's algorithms: set arithmetic instead of rotation surgery, try-all-
permutations isomorphism, exhaustive enumeration. Tests compare library
output against these on small inputs.
"""

from __future__ import annotations

from itertools import combinations, permutations, product

import networkx as nx

from plancode.embgraph import EmbeddedGraph, labeled_equal


def brute_iso(a: EmbeddedGraph, b: EmbeddedGraph) -> bool:
    """Orientation-preserving embedded isomorphism by trying all bijections."""
    if a.n != b.n or a.num_edges != b.num_edges:
        return False
    for perm in permutations(range(a.n)):
        if labeled_equal(a.relabel(list(perm)), b):
            return True
    return False


def _embedded_rep_rotations(n: int, connected_only: bool):
    """Rotation lists of every embedded graph on nodes 0..n-1, one
    representative per cyclic-rotation choice (first neighbor of each node
    pinned to its smallest, the rest permuted)."""
    all_edges = list(combinations(range(n), 2))
    for mask in range(1 << len(all_edges)):
        edges = [e for i, e in enumerate(all_edges) if mask >> i & 1]
        adj = [[] for _ in range(n)]
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        if connected_only:
            seen = {0}
            stack = [0]
            while stack:
                u = stack.pop()
                for w in adj[u]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            if len(seen) != n:
                continue
        choices = []
        for u in range(n):
            row = sorted(adj[u])
            if len(row) <= 2:
                choices.append([row])
            else:
                choices.append([[row[0], *p] for p in permutations(row[1:])])
        yield from product(*choices)


def all_connected_embedded_graphs(n: int):
    """Every connected embedded graph on nodes 0..n-1, one representative per
    cyclic-rotation choice."""
    for rots in _embedded_rep_rotations(n, connected_only=True):
        yield EmbeddedGraph.from_rotations([list(r) for r in rots])


def nx_rotations(G: nx.Graph) -> list[list[int]] | None:
    """Clockwise rotation lists from networkx's planarity test, or None if
    the graph is not planar. Nodes must be 0..n-1."""
    ok, emb = nx.check_planarity(G)
    if not ok:
        return None
    return [list(emb.neighbors_cw_order(v)) for v in sorted(G.nodes)]


def to_nx(g: EmbeddedGraph) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(g.edges())
    return G


def induced_edges(g: EmbeddedGraph, nodes: set[int]) -> set[tuple[int, int]]:
    return {(u, v) for u, v in g.edges() if u in nodes and v in nodes}


def boundary_subgraph_edges(g: EmbeddedGraph, part: set[int]) -> set[tuple[int, int]]:
    """Edges of the part graph: everything incident to part, nothing between
    two outside nodes."""
    return {(u, v) for u, v in g.edges() if u in part or v in part}


# -- rotation-list oracles (independent of the library's internals) -------------
#
# These work on plain neighbor lists and use permutation search, so they share
# no algorithm with the library's BFS canonicalization or face bookkeeping.


def rot_edge_count(rots) -> int:
    return sum(len(r) for r in rots) // 2


def rot_component_count(rots) -> int:
    n = len(rots)
    seen = [False] * n
    comps = 0
    for s in range(n):
        if seen[s]:
            continue
        comps += 1
        seen[s] = True
        stack = [s]
        while stack:
            u = stack.pop()
            for w in rots[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
    return comps


def rot_face_lengths(rots) -> list[int]:
    """Dart-lengths of the face orbits of a rotation system: successor of
    dart (u -> v) is (v -> w) where w follows u in v's rotation."""
    pos = [{w: i for i, w in enumerate(r)} for r in rots]
    unvisited = {(u, v) for u, r in enumerate(rots) for v in r}
    lengths = []
    while unvisited:
        u0, v0 = next(iter(unvisited))
        length = 0
        u, v = u0, v0
        while True:
            unvisited.discard((u, v))
            length += 1
            i = pos[v][u]
            u, v = v, rots[v][(i + 1) % len(rots[v])]
            if (u, v) == (u0, v0):
                break
        lengths.append(length)
    return lengths


def rot_genus(rots) -> int:
    """Total genus over components, by the Euler formula. An isolated node
    has no dart orbit but bounds one face."""
    n = len(rots)
    m = rot_edge_count(rots)
    f = len(rot_face_lengths(rots)) + sum(1 for r in rots if not r)
    c = rot_component_count(rots)
    euler = n - m + f
    assert (2 * c - euler) % 2 == 0
    return (2 * c - euler) // 2


def rot_is_planar(rots) -> bool:
    return rot_genus(rots) == 0


def rot_is_plane_connected(rots) -> bool:
    return rot_component_count(rots) == 1 and rot_genus(rots) == 0


def rot_is_plane_triangulation(rots) -> bool:
    return (
        len(rots) >= 3
        and rot_component_count(rots) == 1
        and rot_genus(rots) == 0
        and all(length == 3 for length in rot_face_lengths(rots))
    )


def rot_is_forest_deg5(rots) -> bool:
    n = len(rots)
    return (
        all(len(r) <= 5 for r in rots)
        and rot_edge_count(rots) == n - rot_component_count(rots)
    )


ORACLE_PREDICATES = {
    "planar": (rot_is_planar, False),
    "plane-connected": (rot_is_plane_connected, True),
    "plane-triangulation": (rot_is_plane_triangulation, True),
    "forest-deg5": (rot_is_forest_deg5, False),
}


def _degree_class_perms(rots):
    """Node bijections into a normalized label space: nodes grouped by
    (degree, sorted neighbor degrees), groups assigned fixed consecutive
    label ranges in signature order, members permuted within their range.
    Isomorphic graphs get identical image spaces, so minimizing over these
    maps canonicalizes."""
    n = len(rots)
    sig = [(len(rots[v]), tuple(sorted(len(rots[w]) for w in rots[v]))) for v in range(n)]
    groups: dict[tuple, list[int]] = {}
    for v in range(n):
        groups.setdefault(sig[v], []).append(v)
    keys = sorted(groups)
    base = {}
    offset = 0
    for k in keys:
        base[k] = offset
        offset += len(groups[k])
    for assignment in product(*[permutations(range(len(groups[k]))) for k in keys]):
        perm = [0] * n
        for k, order in zip(keys, assignment):
            for old, pos in zip(groups[k], order):
                perm[old] = base[k] + pos
        yield perm


def oracle_canon(rots) -> tuple:
    """Canonical key of an embedded graph: the lexicographically smallest
    relabeled rotation table over all invariant-respecting bijections, each
    row rotated to start at its smallest neighbor."""
    best = None
    for perm in _degree_class_perms(rots):
        table = [None] * len(rots)
        for v, row in enumerate(rots):
            new_row = [perm[w] for w in row]
            if new_row:
                k = new_row.index(min(new_row))
                new_row = new_row[k:] + new_row[:k]
            table[perm[v]] = tuple(new_row)
        key = tuple(table)
        if best is None or key < best:
            best = key
    return best


_oracle_count_cache: dict[tuple[str, int], int] = {}


def oracle_class_count(name: str, m: int) -> int:
    """Number of isomorphism classes of embedded graphs on m nodes in the
    class, by exhaustive enumeration and permutation-search dedup."""
    try:
        return _oracle_count_cache[(name, m)]
    except KeyError:
        pass
    predicate, connected_only = ORACLE_PREDICATES[name]
    seen = set()
    for rots in _embedded_rep_rotations(m, connected_only):
        if predicate(rots):
            seen.add(oracle_canon(rots))
    _oracle_count_cache[(name, m)] = len(seen)
    return len(seen)


# -- shared fixtures and graph builders ----------------------------------------

K4_PLANAR = [[1, 3, 2], [2, 3, 0], [0, 3, 1], [0, 1, 2]]
K5_TORUS = [[1, 2, 3, 4], [0, 2, 3, 4], [0, 1, 4, 3], [0, 2, 1, 4], [0, 3, 1, 2]]
K7_TORUS = [[(i + a) % 7 for a in (1, 3, 2, 6, 4, 5)] for i in range(7)]
OCTAHEDRON = [[1, 2, 3, 4], [0, 4, 5, 2], [0, 1, 5, 3], [0, 2, 5, 4], [0, 3, 5, 1], [1, 4, 3, 2]]


def random_tree_rotations(n, rng):
    rots = [[] for _ in range(n)]
    for v in range(1, n):
        u = rng.randrange(v)
        rots[u].insert(rng.randrange(len(rots[u]) + 1), v)
        rots[v].append(u)
    return rots


def random_planar_embedded(n, p, rng):
    """Random connected planar graph embedded via networkx (independent of
    the library): a random stacked triangulation (new node into a random
    face, joined to its three corners) thinned down to the requested density
    while staying connected."""
    if n == 1:
        return EmbeddedGraph.from_rotations([[]])
    if n == 2:
        return EmbeddedGraph.from_rotations([[1], [0]])
    G = nx.Graph()
    G.add_edges_from([(0, 1), (1, 2), (0, 2)])
    faces = [(0, 1, 2), (0, 1, 2)]  # both sides of the starting triangle
    for v in range(3, n):
        i = rng.randrange(len(faces))
        a, b, c = faces[i]
        G.add_edges_from([(v, a), (v, b), (v, c)])
        faces[i] = (a, b, v)
        faces += [(a, c, v), (b, c, v)]
    target = max(n - 1, min(G.number_of_edges(), int(p * n * (n - 1) / 2)))
    edges = list(G.edges())
    rng.shuffle(edges)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    kept, pool = [], []
    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            kept.append((u, v))
        else:
            pool.append((u, v))
    kept += pool[: max(0, target - len(kept))]
    H = nx.Graph()
    H.add_nodes_from(range(n))
    H.add_edges_from(kept)
    return EmbeddedGraph.from_rotations(nx_rotations(H))


def grid_rotations(rows, cols):
    """Plane grid embedding: clockwise neighbor order up, right, down, left."""
    rots = []
    for i in range(rows):
        for j in range(cols):
            row = []
            if i > 0:
                row.append((i - 1) * cols + j)
            if j < cols - 1:
                row.append(i * cols + j + 1)
            if i < rows - 1:
                row.append((i + 1) * cols + j)
            if j > 0:
                row.append(i * cols + j - 1)
            rots.append(row)
    return rots


def wheel_with_tails(rim, tail):
    """A wheel (hub and a rim cycle) with a pendant path hanging off two
    opposite rim nodes. BFS from a tail end then produces many thin levels
    and a fat middle, which exercises the cycle phase of the separator."""
    n_tail = 2 * tail
    hub = n_tail
    rim0 = n_tail + 1
    rots = [[] for _ in range(n_tail + 1 + rim)]
    for t in range(2):
        base = t * tail
        for i in range(tail):
            v = base + i
            if i > 0:
                rots[v].append(v - 1)
            if i < tail - 1:
                rots[v].append(v + 1)
    rots[hub] = [rim0 + i for i in range(rim)]
    for i in range(rim):
        v = rim0 + i
        rots[v] = [rim0 + (i - 1) % rim, rim0 + (i + 1) % rim, hub]
    # attach tail ends outside the rim cycle (between the rim neighbours)
    rots[rim0].insert(1, tail - 1)
    rots[tail - 1].append(rim0)
    far = rim0 + rim // 2
    rots[far].insert(1, n_tail - 1)
    rots[n_tail - 1].append(far)
    return rots
