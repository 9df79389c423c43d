"""Unramified coverings, deck groups and normalized Frobenius automorphisms.

All coverings here are maps of half-edge rotation graphs: the vertex map
must carry the half-edges at a vertex bijectively (color for color) onto
the half-edges at its image, compatibly with the pairing.  Deck
transformations are found by path-lifting: a color-respecting
automorphism over the base is determined by the image of one vertex.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .automaton import DEFAULT_LEVEL_LIMIT, check_level_limit
from .errors import NotACovering, NotNormal
from .graphs import build_schreier, build_tile, is_connected, label_str


@dataclass
class CoveringMap:
    total: object  # RotationGraph
    base: object  # RotationGraph
    vertex_map: list  # total vertex index -> base vertex index


def check_unramified(c):
    """Validate the covering and return the sheet count."""
    total, base = c.total, c.base
    if not total.vertices:
        raise NotACovering(None, "empty total graph")
    if not is_connected(base):
        raise NotACovering(None, "base graph is disconnected")
    fibers = {bi: [] for bi in range(len(base.vertices))}
    for vi, bi in enumerate(c.vertex_map):
        fibers[bi].append(vi)
    sizes = {len(f) for f in fibers.values()}
    if 0 in sizes:
        raise NotACovering(None, "vertex map is not surjective")
    if len(sizes) != 1:
        raise NotACovering(None, f"fibers have different sizes {sorted(sizes)}")
    for vi, bi in enumerate(c.vertex_map):
        for ci in range(len(total.colors)):
            p = total.pairing[vi][ci]
            q = base.pairing[bi][ci]
            if (p is None) != (q is None):
                raise NotACovering(total.vertices[vi],
                                   f"half-edge color {total.colors[ci]} does not match the base")
            if p is None:
                continue
            vj, cj = p
            if q != (c.vertex_map[vj], cj):
                raise NotACovering(total.vertices[vi],
                                   f"pairing not equivariant on color {total.colors[ci]}")
    return len(next(iter(fibers.values())))


def identity_covering(g):
    return CoveringMap(g, g, list(range(len(g.vertices))))


def level_covering(aut, base_level, extra=1, limit=DEFAULT_LEVEL_LIMIT):
    """The covering of level graphs that forgets the last `extra` letters."""
    check_level_limit(aut.d, base_level + extra, limit)
    total = build_schreier(aut, base_level + extra, limit)
    base = build_schreier(aut, base_level, limit)
    vmap = [base.vindex[w[:base_level]] for w in total.vertices]
    c = CoveringMap(total, base, vmap)
    check_unramified(c)
    return c


def _extend_from_seed(c, seed):
    """Unique color-respecting extension of v0 -> seed, or None."""
    total = c.total
    n = len(total.vertices)
    m = [None] * n
    m[0] = seed
    if c.vertex_map[seed] != c.vertex_map[0]:
        return None
    stack = [0]
    assigned = 1
    while stack:
        vi = stack.pop()
        wi = m[vi]
        for ci in range(len(total.colors)):
            p = total.pairing[vi][ci]
            q = total.pairing[wi][ci]
            if p is None and q is None:
                continue
            if p is None or q is None:
                return None
            vj, cj = p
            wj, cj2 = q
            if cj != cj2:
                return None
            if m[vj] is None:
                if c.vertex_map[wj] != c.vertex_map[vj]:
                    return None
                m[vj] = wj
                assigned += 1
                stack.append(vj)
            elif m[vj] != wj:
                return None
    if assigned != n or len(set(m)) != n:
        return None
    return tuple(m)


@dataclass
class DeckGroup:
    covering: CoveringMap
    elements: list  # vertex permutations as tuples; identity first

    def __post_init__(self):
        self._index = {e: i for i, e in enumerate(self.elements)}

    @property
    def order(self):
        return len(self.elements)

    @property
    def identity(self):
        return 0

    def compose(self, i, j):
        """Index of elements[i] after elements[j] (apply j first)."""
        ei, ej = self.elements[i], self.elements[j]
        return self._index[tuple(ei[x] for x in ej)]

    def inverse(self, i):
        e = self.elements[i]
        inv = [0] * len(e)
        for a, b in enumerate(e):
            inv[b] = a
        return self._index[tuple(inv)]

    def element_order(self, i):
        k, j = 1, i
        while j != 0:
            j = self.compose(i, j)
            k += 1
        return k

    def is_abelian(self):
        r = range(self.order)
        return all(self.compose(i, j) == self.compose(j, i) for i in r for j in r)


def deck_group(c):
    """All automorphisms of the total graph over the base, by path lifting."""
    total = c.total
    if not is_connected(total):
        raise NotACovering(None, "deck group needs a connected total graph")
    b0 = c.vertex_map[0]
    fiber = sorted(w for w in range(len(total.vertices)) if c.vertex_map[w] == b0)
    elements = []
    for w in fiber:
        m = _extend_from_seed(c, w)
        if m is not None:
            elements.append(m)
    dg = DeckGroup(c, elements)
    # closure sanity: deck transformations form a group
    for i in range(dg.order):
        for j in range(dg.order):
            dg.compose(i, j)
    return dg


def is_normal(c, dg=None):
    sheets = check_unramified(c)
    if dg is None:
        dg = deck_group(c)
    return dg.order == sheets


# -- spanning trees, sections and Frobenius elements -------------------------


@dataclass
class SpanningTree:
    graph: object
    root: int
    order: list  # (parent vertex, color at parent, child vertex) in BFS order
    tree_keys: set  # canonical half-edge reps of tree edges
    nontree: list  # directed reps (vi, ci, vj, cj), deterministic order


def spanning_tree(g, root=0, priority=None):
    """Spanning tree; loops and half-loops never enter the tree.

    Without a priority this is plain BFS from the root, exploring colors
    in declared order.  With `priority(vi, ci)` the smallest-priority
    frontier half-edge is taken first (Prim style), so that a connected
    priority-0 subgraph always yields a tree inside it.
    """
    import heapq

    n = len(g.vertices)
    visited = [False] * n
    visited[root] = True
    order = []
    tree_keys = set()
    if priority is None:
        queue = [root]
        while queue:
            vi = queue.pop(0)
            for ci in range(len(g.colors)):
                if g.pairing[vi][ci] is None:
                    continue
                vj, cj = g.pairing[vi][ci]
                if not visited[vj]:
                    visited[vj] = True
                    order.append((vi, ci, vj))
                    tree_keys.add(_orbit_key(vi, ci, vj, cj))
                    queue.append(vj)
    else:
        heap = []
        counter = 0

        def push_edges(vi):
            nonlocal counter
            for ci in range(len(g.colors)):
                if g.pairing[vi][ci] is not None:
                    heapq.heappush(heap, (priority(vi, ci), counter, vi, ci))
                    counter += 1

        push_edges(root)
        while heap:
            _p, _c, vi, ci = heapq.heappop(heap)
            vj, cj = g.pairing[vi][ci]
            if visited[vj]:
                continue
            visited[vj] = True
            order.append((vi, ci, vj))
            tree_keys.add(_orbit_key(vi, ci, vj, cj))
            push_edges(vj)
    if not all(visited):
        raise NotACovering(None, "graph is disconnected; no spanning tree")
    nontree = []
    for vi, ci, vj, cj, _kind in g.edges():
        if _orbit_key(vi, ci, vj, cj) not in tree_keys:
            nontree.append((vi, ci, vj, cj))
    return SpanningTree(g, root, order, tree_keys, nontree)


def _orbit_key(vi, ci, vj, cj):
    return frozenset({(vi, ci), (vj, cj)}) if (vi, ci) != (vj, cj) else (vi, ci)


def tree_sections(c, tree):
    """Lifts of a base spanning tree: one section of the vertex map per sheet.

    Returns (sections, sheet_of): each section maps base index -> total
    index; sheet_of maps every total vertex to its section index.  The
    identity section is the one containing the smallest total vertex over
    the tree root.
    """
    total = c.total
    root_fiber = sorted(w for w in range(len(total.vertices))
                        if c.vertex_map[w] == tree.root)
    sections = []
    sheet_of = [None] * len(total.vertices)
    for k, start in enumerate(root_fiber):
        sec = [None] * len(c.base.vertices)
        sec[tree.root] = start
        sheet_of[start] = k
        for (u, ci, v) in tree.order:
            x = sec[u]
            p = total.pairing[x][ci]
            if p is None or c.vertex_map[p[0]] != v:
                raise NotACovering(total.vertices[x], "tree edge fails to lift")
            sec[v] = p[0]
            if sheet_of[p[0]] is not None and sheet_of[p[0]] != k:
                raise NotACovering(total.vertices[p[0]], "tree lifts overlap")
            sheet_of[p[0]] = k
        sections.append(sec)
    if any(s is None for s in sheet_of):
        raise NotACovering(None, "tree lifts do not cover the total graph")
    return sections, sheet_of


def label_sections(dg, sections):
    """For a normal covering: section index -> deck element carrying section 0 to it."""
    labels = [None] * len(sections)
    sec0 = sections[0]
    for k, sec in enumerate(sections):
        for gi, elem in enumerate(dg.elements):
            if all(elem[sec0[b]] == sec[b] for b in range(len(sec))):
                labels[k] = gi
                break
        if labels[k] is None:
            raise NotNormal("no deck element maps the identity sheet to "
                            f"sheet {k}; covering is not normal")
    return labels


def frobenius(c, tree, edge, sections, sheet_of, labels):
    """Normalized Frobenius element of a directed non-tree base edge.

    Lifts the edge from the identity sheet; the result is the deck element
    labeling the sheet where the lift ends.  Tree edges give the identity.
    """
    vi, ci, _vj, _cj = edge
    x = sections[0][vi]
    p = c.total.pairing[x][ci]
    if p is None:
        raise NotACovering(c.total.vertices[x], "edge fails to lift")
    return labels[sheet_of[p[0]]]


def frobenius_table(c, tree, dg):
    """All normalized Frobenius elements of the non-tree edges of the base."""
    sheets = check_unramified(c)
    if dg.order != sheets:
        raise NotNormal(f"covering has {sheets} sheets but deck order {dg.order}")
    sections, sheet_of = tree_sections(c, tree)
    labels = label_sections(dg, sections)
    table = []
    for edge in tree.nontree:
        table.append((edge, frobenius(c, tree, edge, sections, sheet_of, labels)))
    return table


def deck_closure(dg, generators):
    seen = {dg.identity}
    frontier = list(set(generators))
    seen |= set(frontier)
    while frontier:
        a = frontier.pop()
        for b in list(seen):
            for x in (dg.compose(a, b), dg.compose(b, a)):
                if x not in seen:
                    seen.add(x)
                    frontier.append(x)
    return seen


# -- the root-permutation criterion for Galois coverings ----------------------


@dataclass
class GaloisReport:
    status: str  # "pass" | "fail" | "hypothesis_not_met"
    d: int
    level: int
    psi_order: int
    deck_order: int
    normal: bool
    sheet_consistent: bool = False
    frobenius_checked: int = 0
    mismatches: list = field(default_factory=list)

    @property
    def ok(self):
        return self.status == "pass"

    def __str__(self):
        head = (f"levels {self.level + 1}|{self.level}: d={self.d}, "
                f"|psi|={self.psi_order}, deck order {self.deck_order}, "
                f"{'normal' if self.normal else 'non-normal'}")
        if self.status == "hypothesis_not_met":
            return head + " -- hypothesis |psi| = d not met"
        tail = (f", {self.frobenius_checked} Frobenius elements checked"
                f" -> {self.status.upper()}")
        return head + tail


def verify_galois_theorem(aut, n, limit=DEFAULT_LEVEL_LIMIT):
    """Check the root-permutation description of deck groups of consecutive levels.

    When the root permutations generate a group of order d, the covering
    of level n+1 over level n must be normal, sheets (last letters) must
    be permuted globally by every deck element, and the normalized
    Frobenius element of every non-tile edge {u, g(u)} must act on sheets
    by the root permutation of the restriction g|_u.
    """
    if aut.activity_class().kind != "bounded":
        raise NotNormal("the criterion is stated for bounded automata")
    if not (aut.is_level_transitive(n, limit) and aut.is_level_transitive(n + 1, limit)):
        raise NotNormal(f"action is not transitive on levels {n} and {n + 1}")
    _, psi_order = aut.root_permutation_group()
    c = level_covering(aut, n, 1, limit)
    d = check_unramified(c)
    dg = deck_group(c)
    normal = dg.order == d
    report = GaloisReport("fail", d, n, psi_order, dg.order, normal)
    if psi_order != d:
        report.status = "hypothesis_not_met"
        return report
    if not normal:
        report.mismatches.append("covering is not normal")
        return report

    # every deck element must act on the last letter only
    total = c.total
    letter_maps = []
    for elem in dg.elements:
        tau = [None] * d
        ok = True
        for vi, w in enumerate(total.vertices):
            img = total.vertices[elem[vi]]
            if img[:-1] != w[:-1]:
                ok = False
                break
            x, y = w[-1], img[-1]
            if tau[x] is None:
                tau[x] = y
            elif tau[x] != y:
                ok = False
                break
        if not ok:
            report.mismatches.append("a deck element does not permute sheets")
            return report
        letter_maps.append(tuple(tau))
    report.sheet_consistent = True
    psi_elements, _ = aut.root_permutation_group()
    if sorted(letter_maps) != list(psi_elements):
        report.mismatches.append("sheet action differs from the root permutations")
        return report
    for i in range(dg.order):
        for j in range(dg.order):
            k = dg.compose(i, j)
            composed = tuple(letter_maps[i][letter_maps[j][x]] for x in range(d))
            if letter_maps[k] != composed:
                report.mismatches.append("sheet action is not a homomorphism")
                return report

    # Frobenius elements of the non-tile edges act by the restriction's
    # root permutation; the spanning tree prefers tile edges so that its
    # lifts are exactly the last-letter sheets.
    base = c.base

    def tile_priority(vi, ci):
        _img, rest = aut.act_state_word(base.colors[ci], base.vertices[vi])
        return 0 if rest == 0 else 1

    tree = spanning_tree(base, 0, tile_priority)
    sections, sheet_of = tree_sections(c, tree)
    labels = label_sections(dg, sections)
    checked = 0
    for vi, w in enumerate(base.vertices):
        for ci, name in enumerate(base.colors):
            _img, rest = aut.act_state_word(name, w)
            if rest == 0:
                continue
            x = sections[0][vi]
            p = total.pairing[x][ci]
            sigma = labels[sheet_of[p[0]]]
            checked += 1
            if letter_maps[sigma] != aut.perms[rest]:
                report.mismatches.append(
                    f"edge ({label_str(w)}, {name}): Frobenius sheet action "
                    f"{letter_maps[sigma]} != root permutation {aut.perms[rest]}")
    report.frobenius_checked = checked
    if not report.mismatches:
        report.status = "pass"
    return report
