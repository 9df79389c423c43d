"""The generalized replacement product of two level graphs.

Vertices are pairs (v, u) in X^n x X^r.  The rotation of the half-edge
((v, u), s) is:

    ((v, s(u)), s^-1)                     if s|_u is trivial   [sheet edge]
    ((s|_u(v), s(u)), s^-1)               otherwise, classified by s|_{uv}:
        trivial     -> model lift
        nontrivial  -> Schreier lift

Relabeling (v, u) -> u.v identifies the product with the level n+r
Schreier graph, and forgetting the last n letters is an unramified
covering onto the level-r graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .automaton import DEFAULT_LEVEL_LIMIT, all_words, check_level_limit
from .graphs import RotationGraph, build_schreier, label_str

SHEET = "sheet"
MODEL = "model"
SCHREIER = "schreier"


@dataclass
class ProductGraph:
    graph: RotationGraph
    n: int
    r: int
    edge_class: dict  # (vertex index, color index) -> sheet|model|schreier

    def class_counts(self):
        counts = {SHEET: 0, MODEL: 0, SCHREIER: 0}
        for vi, ci, vj, cj, _kind in self.graph.edges():
            counts[self.edge_class[(vi, ci)]] += 1
        return counts


def gen_replacement(aut, n, r, limit=DEFAULT_LEVEL_LIMIT):
    check_level_limit(aut.d, n + r, limit)
    vwords = all_words(aut.d, n)
    uwords = all_words(aut.d, r)
    labels = [(v, u) for v in vwords for u in uwords]
    g = RotationGraph(labels, aut.symbols)
    color_of = {name: ci for ci, name in enumerate(aut.symbols)}
    edge_class = {}
    for li, (v, u) in enumerate(labels):
        for ci, name in enumerate(aut.symbols):
            if g.pairing[li][ci] is not None:
                continue
            u_img, t = aut.act_state_word(name, u)
            inv_ci = color_of[aut.state_names[aut.inverse[aut.index[name]]]]
            if t == 0:
                target = (v, u_img)
                cls = SHEET
            else:
                v_img, t2 = aut.act_state_word(t, v)
                target = (v_img, u_img)
                cls = MODEL if t2 == 0 else SCHREIER
            ti = g.vindex[target]
            g.set_pair(li, ci, ti, inv_ci)
            edge_class[(li, ci)] = cls
            edge_class[(ti, inv_ci)] = cls
    g.check_involution()
    return ProductGraph(g, n, r, edge_class)


@dataclass
class IsoReport:
    ok: bool
    total_level: int
    diffs: list = field(default_factory=list)

    def __str__(self):
        if self.ok:
            return (f"replacement product is isomorphic to the level-"
                    f"{self.total_level} Schreier graph under (v,u) -> uv")
        lines = [f"isomorphism FAILED: {len(self.diffs)} differing half-edges"]
        for label, color, got, want in self.diffs[:20]:
            lines.append(f"  at ({label_str(label)}, {color}): product={got} schreier={want}")
        return "\n".join(lines)


def verify_iso_to_schreier(product, aut, limit=DEFAULT_LEVEL_LIMIT):
    """Check that relabeling (v, u) -> u.v gives exactly the Schreier graph."""
    n, r = product.n, product.r
    target = build_schreier(aut, n + r, limit)
    g = product.graph
    to_word = [u + v for (v, u) in g.vertices]
    diffs = []
    for li in range(len(g.vertices)):
        wi = target.vindex[to_word[li]]
        for ci in range(len(g.colors)):
            p = g.pairing[li][ci]
            want = target.pairing[wi][ci]
            got = None if p is None else (target.vindex[to_word[p[0]]], p[1])
            if got != want:
                diffs.append((g.vertices[li], g.colors[ci], got, want))
    return IsoReport(not diffs, n + r, diffs)
