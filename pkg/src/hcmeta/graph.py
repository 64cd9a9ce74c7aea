"""Bipartite interaction graphs: builders, doubling, validation, serialization.

Site ids are dense integers 0..|U|+|V|-1 with the U part first.  Torus sites
are row-major (i, j) pairs; hypercube sites are the integers whose binary
digits spell the vertex word.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BipartiteGraph",
    "GeneralGraph",
    "GraphValidationError",
    "build_family",
    "double_graph",
    "neighborhood",
    "validate",
    "parse_graph_spec",
    "graphs_isomorphic",
]


class GraphValidationError(ValueError):
    """Raised when a graph fails a structural requirement."""


@dataclass(frozen=True)
class GeneralGraph:
    """A finite simple undirected graph, input to :func:`double_graph`."""

    n: int
    adjacency: tuple[tuple[int, ...], ...]

    @staticmethod
    def from_edges(n: int, edges) -> "GeneralGraph":
        adj: list[set[int]] = [set() for _ in range(n)]
        for a, b in edges:
            if a == b:
                raise GraphValidationError(f"self-loop at {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise GraphValidationError(f"edge ({a},{b}) out of range for n={n}")
            adj[a].add(b)
            adj[b].add(a)
        return GeneralGraph(n, tuple(tuple(sorted(s)) for s in adj))

    def is_connected(self) -> bool:
        if self.n == 0:
            return False
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in self.adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n


@dataclass(frozen=True)
class BipartiteGraph:
    """Immutable bipartite graph with parts U (first) and V.

    ``adjacency[i]`` is the sorted tuple of neighbours of site ``i``; the
    constructor via :meth:`from_parts` checks bipartiteness, symmetry and
    connectivity rather than assuming them.
    """

    u_sites: tuple[int, ...]
    v_sites: tuple[int, ...]
    adjacency: tuple[tuple[int, ...], ...]
    label: str = "bipartite"
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def n_sites(self) -> int:
        return len(self.u_sites) + len(self.v_sites)

    @property
    def edges(self) -> list[tuple[int, int]]:
        out = []
        for a in self.u_sites:
            for b in self.adjacency[a]:
                out.append((a, b))
        return sorted(out)

    def neighbor_mask(self, site: int) -> int:
        mask = 0
        for w in self.adjacency[site]:
            mask |= 1 << w
        return mask

    @staticmethod
    def from_parts(n_u: int, n_v: int, edges, label: str = "bipartite",
                   meta: dict | None = None) -> "BipartiteGraph":
        n = n_u + n_v
        adj: list[set[int]] = [set() for _ in range(n)]
        for a, b in edges:
            if not (0 <= a < n and 0 <= b < n):
                raise GraphValidationError(f"edge ({a},{b}) out of range")
            if (a < n_u) == (b < n_u):
                raise GraphValidationError(
                    f"edge ({a},{b}) does not cross the bipartition")
            adj[a].add(b)
            adj[b].add(a)
        g = BipartiteGraph(
            u_sites=tuple(range(n_u)),
            v_sites=tuple(range(n_u, n)),
            adjacency=tuple(tuple(sorted(s)) for s in adj),
            label=label,
            meta=meta or {},
        )
        rep = validate(g)
        if not rep.connected:
            raise GraphValidationError(f"{label}: graph is not connected")
        return g

    def to_json(self) -> str:
        return json.dumps({
            "u_sites": list(self.u_sites),
            "v_sites": list(self.v_sites),
            "edges": [[a, b] for a, b in self.edges],
        })

    @staticmethod
    def from_json(text: str) -> "BipartiteGraph":
        obj = json.loads(text)
        n_u = len(obj["u_sites"])
        n_v = len(obj["v_sites"])
        if obj["u_sites"] != list(range(n_u)) or obj["v_sites"] != list(range(n_u, n_u + n_v)):
            raise GraphValidationError("site ids must be dense with U first")
        return BipartiteGraph.from_parts(n_u, n_v, obj["edges"], label="json")


@dataclass(frozen=True)
class ValidationReport:
    bipartite_consistent: bool
    connected: bool
    regular_degree: int | None           # None when irregular
    girth_lower_bound: int               # exact girth when < cap, else cap
    girth_exact: bool                    # True when a shortest cycle was found
    n_u: int
    n_v: int
    n_edges: int


def neighborhood(g: BipartiteGraph, sites) -> set[int]:
    """Exact N(A) on the U side for A a subset of V."""
    v_set = set(g.v_sites)
    out: set[int] = set()
    for a in sites:
        if a not in v_set:
            raise GraphValidationError(f"site {a} is not in the V part")
        out.update(g.adjacency[a])
    return out


def validate(g: BipartiteGraph, girth_cap: int = 64) -> ValidationReport:
    """Structural diagnostics; failures are reported, never raised."""
    n_u, n_v = len(g.u_sites), len(g.v_sites)
    n = n_u + n_v
    ok = True
    u_set = set(g.u_sites)
    for a in range(n):
        for b in g.adjacency[a]:
            if (a in u_set) == (b in u_set):
                ok = False
            if a not in g.adjacency[b]:
                ok = False
        if len(set(g.adjacency[a])) != len(g.adjacency[a]):
            ok = False

    seen = {0} if n else set()
    stack = [0] if n else []
    while stack:
        x = stack.pop()
        for y in g.adjacency[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    connected = len(seen) == n and n > 0

    degs = {len(g.adjacency[a]) for a in range(n)}
    regular = degs.pop() if len(degs) == 1 else None

    girth, exact = _girth_scan(g, girth_cap)
    n_edges = sum(len(g.adjacency[a]) for a in range(n)) // 2
    return ValidationReport(ok, connected, regular, girth, exact, n_u, n_v, n_edges)


def _girth_scan(g: BipartiteGraph, cap: int) -> tuple[int, bool]:
    """Shortest cycle length via per-root BFS, capped."""
    n = g.n_sites
    best = cap
    found = False
    for root in range(n):
        dist = {root: 0}
        parent = {root: -1}
        frontier = [root]
        while frontier:
            nxt = []
            for x in frontier:
                for y in g.adjacency[x]:
                    if y == parent[x]:
                        continue
                    if y in dist:
                        cyc = dist[x] + dist[y] + 1
                        if cyc < best:
                            best, found = cyc, True
                    else:
                        dist[y] = dist[x] + 1
                        parent[y] = x
                        if 2 * dist[y] < best:
                            nxt.append(y)
            frontier = nxt
    return best, found


# ----------------------------------------------------------------------------
# Family builders
# ----------------------------------------------------------------------------

def _complete_bipartite(m: int, n: int) -> BipartiteGraph:
    if m < 1 or n < 1:
        raise GraphValidationError("complete_bipartite needs positive sizes")
    edges = [(i, m + j) for i in range(m) for j in range(n)]
    return BipartiteGraph.from_parts(m, n, edges, label=f"complete:{m}x{n}")


def _even_cycle(length: int) -> BipartiteGraph:
    if length < 4 or length % 2:
        raise GraphValidationError("even_cycle needs an even length >= 4")
    n = length // 2
    # U holds the even cycle positions, V the odd ones; site id = part slot.
    def sid(pos):
        return pos // 2 if pos % 2 == 0 else n + pos // 2
    edges = [(sid(p), sid((p + 1) % length)) for p in range(0, length, 2)]
    edges += [(sid(p), sid((p + 1) % length)) for p in range(1, length, 2)]
    return BipartiteGraph.from_parts(n, n, edges, label=f"cycle:{length}",
                                     meta={"family": "cycle", "length": length})


def _path(n_sites: int) -> BipartiteGraph:
    """Path on n_sites sites, positions 0..n-1, U = even positions."""
    if n_sites < 2:
        raise GraphValidationError("path needs at least 2 sites")
    n_u = (n_sites + 1) // 2
    def sid(pos):
        return pos // 2 if pos % 2 == 0 else n_u + pos // 2
    edges = [(sid(p), sid(p + 1)) for p in range(n_sites - 1)]
    return BipartiteGraph.from_parts(n_u, n_sites - n_u, edges,
                                     label=f"path:{n_sites}")


def _cyclic_ladder(length: int) -> BipartiteGraph:
    """Z_length x Z_2 with wrap in the first coordinate (length even)."""
    if length < 4 or length % 2:
        raise GraphValidationError("cyclic_ladder needs an even length >= 4")
    pts = [(i, j) for i in range(length) for j in range(2)]
    u_pts = [p for p in pts if (p[0] + p[1]) % 2 == 0]
    v_pts = [p for p in pts if (p[0] + p[1]) % 2 == 1]
    sid = {p: k for k, p in enumerate(u_pts)}
    sid.update({p: len(u_pts) + k for k, p in enumerate(v_pts)})
    edges = set()
    for (i, j) in pts:
        a = sid[(i, j)]
        b = sid[((i + 1) % length, j)]
        edges.add((min(a, b), max(a, b)))
        c = sid[(i, 1 - j)]
        edges.add((min(a, c), max(a, c)))
    return BipartiteGraph.from_parts(len(u_pts), len(v_pts), sorted(edges),
                                     label=f"ladder:{length}",
                                     meta={"family": "ladder", "length": length})


def _even_torus(m: int, n: int) -> BipartiteGraph:
    if m < 4 or n < 4 or m % 2 or n % 2:
        raise GraphValidationError("even_torus needs even dimensions >= 4")
    pts = [(i, j) for i in range(m) for j in range(n)]
    u_pts = [p for p in pts if (p[0] + p[1]) % 2 == 0]
    v_pts = [p for p in pts if (p[0] + p[1]) % 2 == 1]
    sid = {p: k for k, p in enumerate(u_pts)}
    sid.update({p: len(u_pts) + k for k, p in enumerate(v_pts)})
    edges = set()
    for (i, j) in pts:
        a = sid[(i, j)]
        for (di, dj) in ((1, 0), (0, 1)):
            b = sid[((i + di) % m, (j + dj) % n)]
            edges.add((min(a, b), max(a, b)))
    return BipartiteGraph.from_parts(len(u_pts), len(v_pts), sorted(edges),
                                     label=f"torus:{m}x{n}",
                                     meta={"family": "torus", "dims": (m, n),
                                           "site_of_point": sid})


def _hypercube(d: int) -> BipartiteGraph:
    if d < 1:
        raise GraphValidationError("hypercube needs d >= 1")
    words = list(range(1 << d))
    u_words = [w for w in words if bin(w).count("1") % 2 == 0]
    v_words = [w for w in words if bin(w).count("1") % 2 == 1]
    sid = {w: k for k, w in enumerate(u_words)}
    sid.update({w: len(u_words) + k for k, w in enumerate(v_words)})
    edges = set()
    for w in words:
        for b in range(d):
            x = w ^ (1 << b)
            edges.add((min(sid[w], sid[x]), max(sid[w], sid[x])))
    return BipartiteGraph.from_parts(len(u_words), len(v_words), sorted(edges),
                                     label=f"hypercube:{d}",
                                     meta={"family": "hypercube", "d": d,
                                           "site_of_word": sid})


def _random_bipartite(n_u: int, n_v: int, edge_prob: float, seed: int,
                      retries: int = 100) -> BipartiteGraph:
    if n_u < 1 or n_v < 1:
        raise GraphValidationError("random_bipartite needs positive sizes")
    if not (0.0 < edge_prob <= 1.0):
        raise GraphValidationError("edge_prob must be in (0, 1]")
    for attempt in range(retries):
        rng = np.random.Generator(np.random.Philox(key=seed + attempt))
        edges = [(i, n_u + j) for i in range(n_u) for j in range(n_v)
                 if rng.random() < edge_prob]
        try:
            return BipartiteGraph.from_parts(
                n_u, n_v, edges, label=f"random:{n_u}x{n_v}:{edge_prob}:{seed}")
        except GraphValidationError:
            continue
    raise GraphValidationError(
        f"random_bipartite({n_u},{n_v},{edge_prob},{seed}): "
        f"no connected sample within {retries} retries")


def double_graph(g: GeneralGraph, label: str = "doubled") -> BipartiteGraph:
    """Doubled version of a general graph: red copies are U, blue copies V.

    Edge between (i, red) and (j, blue) iff i == j or (i, j) is an edge of g.
    Red copy of vertex k has site id k; blue copy has id n + k.
    """
    if not g.is_connected():
        raise GraphValidationError("double_graph needs a connected input")
    n = g.n
    edges = [(k, n + k) for k in range(n)]
    for a in range(n):
        for b in g.adjacency[a]:
            edges.append((a, n + b))
    return BipartiteGraph.from_parts(n, n, edges, label=label)


_GENERAL_FAMILIES = ("cycle", "torus", "hypercube", "path", "complete")


def _general_family(name: str, args: list[int]) -> GeneralGraph:
    if name == "cycle":
        (length,) = args
        if length < 3:
            raise GraphValidationError("general cycle needs length >= 3")
        return GeneralGraph.from_edges(length, [(i, (i + 1) % length)
                                                for i in range(length)])
    if name == "torus":
        m, n = args
        if m < 3 or n < 3:
            raise GraphValidationError("general torus needs dims >= 3")
        def sid(i, j):
            return i * n + j
        edges = []
        for i in range(m):
            for j in range(n):
                edges.append((sid(i, j), sid((i + 1) % m, j)))
                edges.append((sid(i, j), sid(i, (j + 1) % n)))
        g = GeneralGraph.from_edges(m * n, edges)
        return g
    if name == "hypercube":
        (d,) = args
        edges = [(w, w ^ (1 << b)) for w in range(1 << d) for b in range(d)
                 if w < (w ^ (1 << b))]
        return GeneralGraph.from_edges(1 << d, edges)
    if name == "path":
        (ns,) = args
        return GeneralGraph.from_edges(ns, [(i, i + 1) for i in range(ns - 1)])
    if name == "vertex":
        return GeneralGraph.from_edges(1, [])
    raise GraphValidationError(f"unknown general family {name!r}")


def build_family(spec: str) -> BipartiteGraph:
    """Build a bipartite graph from a CLI family string.

    Accepted forms: ``complete:MxN``, ``cycle:L`` (even L), ``path:SITES``,
    ``ladder:L`` (Z_L x Z_2, even L), ``torus:MxN`` (even M, N),
    ``hypercube:D``, ``random:NUxNV:P:SEED``, and ``doubled(INNER)`` where
    INNER is a general family (``torus:MxN`` any dims, ``cycle:L`` any L,
    ``hypercube:D``, ``path:SITES``, ``vertex``).
    """
    return parse_graph_spec(spec)


def parse_graph_spec(spec: str) -> BipartiteGraph:
    spec = spec.strip()
    if spec.startswith("doubled(") and spec.endswith(")"):
        inner = spec[len("doubled("):-1]
        name, *rest = inner.split(":")
        args = [int(x) for x in rest[0].split("x")] if rest else []
        base = _general_family(name, args)
        g = double_graph(base, label=f"doubled({inner})")
        g.meta["family"] = f"doubled-{name}"
        if name == "torus":
            g.meta["dims"] = tuple(args)
        if name == "cycle":
            g.meta["length"] = args[0]
        return g
    name, *rest = spec.split(":")
    if name == "complete":
        m, n = (int(x) for x in rest[0].split("x"))
        return _complete_bipartite(m, n)
    if name == "cycle":
        return _even_cycle(int(rest[0]))
    if name == "path":
        return _path(int(rest[0]))
    if name == "ladder":
        return _cyclic_ladder(int(rest[0]))
    if name == "torus":
        m, n = (int(x) for x in rest[0].split("x"))
        return _even_torus(m, n)
    if name == "hypercube":
        return _hypercube(int(rest[0]))
    if name == "random":
        m, n = (int(x) for x in rest[0].split("x"))
        return _random_bipartite(m, n, float(rest[1]), int(rest[2]))
    raise GraphValidationError(f"unknown graph spec {spec!r}")


# ----------------------------------------------------------------------------
# Isomorphism (test support, graphs <= 64 vertices)
# ----------------------------------------------------------------------------

def graphs_isomorphic(g1: BipartiteGraph, g2: BipartiteGraph) -> bool:
    """Backtracking isomorphism test for small graphs (<= 64 vertices)."""
    n1, n2 = g1.n_sites, g2.n_sites
    if n1 != n2 or n1 > 64:
        raise GraphValidationError("isomorphism check limited to equal sizes <= 64")
    deg1 = sorted(len(g1.adjacency[a]) for a in range(n1))
    deg2 = sorted(len(g2.adjacency[a]) for a in range(n2))
    if deg1 != deg2:
        return False

    adj1 = [set(g1.adjacency[a]) for a in range(n1)]
    adj2 = [set(g2.adjacency[a]) for a in range(n2)]

    # Map vertices of g1 in BFS order so each new vertex has a mapped anchor.
    order = []
    seen = {0}
    queue = [0]
    while queue:
        x = queue.pop(0)
        order.append(x)
        for y in g1.adjacency[x]:
            if y not in seen:
                seen.add(y)
                queue.append(y)

    mapping: dict[int, int] = {}
    used: set[int] = set()

    def feasible(x: int, y: int) -> bool:
        if len(adj1[x]) != len(adj2[y]):
            return False
        for w in adj1[x]:
            if w in mapping and mapping[w] not in adj2[y]:
                return False
        mapped_nbrs = {mapping[w] for w in adj1[x] if w in mapping}
        for z in adj2[y]:
            if z in used and z not in mapped_nbrs:
                return False
        return True

    def rec(k: int) -> bool:
        if k == len(order):
            return True
        x = order[k]
        for y in range(n2):
            if y in used or not feasible(x, y):
                continue
            mapping[x] = y
            used.add(y)
            if rec(k + 1):
                return True
            del mapping[x]
            used.remove(y)
        return False

    return rec(0)
