"""Model graphs and inflation of tile graphs.

The order-n model graph lives on P x X^n, where P is the post-critical
set.  Its edges are carried by half-edges (germ, x) where the germ is a
left-infinite nontrivial path ending at a state t with t|_x trivial; the
pairing sends (germ, x) to (inverse germ, t(x)).  This half-edge form is
what makes inflation exact as colored multigraphs: the tile-level color
of a model edge at copy level r is the germ's state at backward distance
r, and the edge multiplicity is the number of distinct germs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .automaton import DEFAULT_LEVEL_LIMIT, all_words, check_level_limit
from .errors import InflationError
from .graphs import (RotationGraph, build_schreier, build_tile, enumerate_germs,
                     label_str, word_str)


@dataclass
class ModelGraph:
    order: int
    sequences: list  # canonical EventuallyPeriodicWord, sorted
    germs: list
    seq_of_germ: list  # germ index -> sequence index
    inverse_germ: list  # germ index -> germ index
    pairing: dict  # (germ index, x word) -> (germ index, y word)
    words: list  # X^order in lex order

    def vertices(self):
        return [(pi, x) for pi in range(len(self.sequences)) for x in self.words]

    def edge_pairs(self):
        """Unordered vertex pairs, one per pairing orbit (with multiplicity)."""
        seen = set()
        out = []
        for (gi, x), (gj, y) in self.pairing.items():
            key = frozenset({(gi, x), (gj, y)}) if (gi, x) != (gj, y) else ((gi, x),)
            if key in seen:
                continue
            seen.add(key)
            a = (self.seq_of_germ[gi], x)
            b = (self.seq_of_germ[gj], y)
            out.append(tuple(sorted((a, b))))
        out.sort()
        return out

    def num_edges(self):
        return len(self.edge_pairs())


def model_graph(aut, n, limit=DEFAULT_LEVEL_LIMIT):
    """The order-n model graph of a bounded automaton."""
    check_level_limit(aut.d, n, limit)
    germs = enumerate_germs(aut)
    germ_index = {g: i for i, g in enumerate(germs)}
    inverse = []
    for g in germs:
        gi = germ_index.get(g.inverse(aut))
        if gi is None:
            raise InflationError("germ set is not closed under inversion")
        inverse.append(gi)
    sequences = sorted({g.sequence() for g in germs},
                       key=lambda p: p.sort_key())
    seq_index = {p: i for i, p in enumerate(sequences)}
    seq_of_germ = [seq_index[g.sequence()] for g in germs]

    pairing = {}
    words = all_words(aut.d, n)
    for gi, g in enumerate(germs):
        t = g.terminal
        for x in words:
            img, rest = aut.act_state_word(t, x)
            if rest == 0:
                pairing[(gi, x)] = (inverse[gi], img)
    for he, pe in pairing.items():
        if pairing.get(pe) != he:
            raise InflationError(f"model pairing is not an involution at {he}")
    return ModelGraph(n, sequences, germs, seq_of_germ, inverse, pairing, words)


def inflate(tile, model, aut):
    """Build the level r+n tile graph from the level-r tile and the order-n model.

    Copies of the tile are indexed by x in X^n; the copy vertex (u, x) is
    the word u.x.  Model half-edges (germ, x) become half-edges
    (p_r . x, s) where p_r is the length-r truncation of the germ's input
    sequence and s is the germ's state at backward distance r.
    """
    if not tile.vertices:
        raise InflationError("empty tile graph")
    r = len(tile.vertices[0])
    n = model.order
    words = all_words(aut.d, r + n)
    out = RotationGraph(words, tile.colors)
    color_of = {name: ci for ci, name in enumerate(tile.colors)}
    xwords = all_words(aut.d, n)

    for x in xwords:
        for vi, ci in tile.half_edges():
            vj, cj = tile.pairing[vi][ci]
            a = out.vindex[tile.vertices[vi] + x]
            b = out.vindex[tile.vertices[vj] + x]
            out.pairing[a][ci] = (b, cj)

    for (gi, x), (gj, y) in model.pairing.items():
        g = model.germs[gi]
        s = g.state_at(r)
        s_name = aut.state_names[s]
        if s_name not in color_of:
            raise InflationError(f"model edge needs non-generator color {s_name!r}")
        u = g.sequence().truncate(r)
        q = model.germs[gj].sequence().truncate(r)
        a = out.vindex[u + x]
        ci = color_of[s_name]
        if out.pairing[a][ci] is not None:
            raise InflationError(
                f"half-edge collision at vertex {word_str(u + x)} color {s_name}")
        inv_name = aut.state_names[aut.inverse[s]]
        out.pairing[a][ci] = (out.vindex[q + y], color_of[inv_name])

    out.check_involution()
    return out


def complete_to_schreier(tile, aut):
    """Add the missing half-edges (v, s) with s|_v nontrivial."""
    out = RotationGraph(tile.vertices, tile.colors,
                        [row[:] for row in tile.pairing])
    color_of = {name: ci for ci, name in enumerate(tile.colors)}
    for vi, w in enumerate(out.vertices):
        for ci, name in enumerate(out.colors):
            if out.pairing[vi][ci] is not None:
                continue
            img, _ = aut.act_state_word(name, w)
            inv = aut.state_names[aut.inverse[aut.index[name]]]
            out.pairing[vi][ci] = (out.vindex[img], color_of[inv])
    out.check_involution()
    return out


@dataclass
class InflationReport:
    ok: bool
    level: int
    diffs: list = field(default_factory=list)
    error: str = ""

    def __str__(self):
        if self.ok:
            return f"inflation reproduces the level-{self.level} tile graph"
        if self.error:
            return f"inflation FAILED: {self.error}"
        lines = [f"inflation FAILED at level {self.level}: {len(self.diffs)} differing half-edges"]
        for v, c, got, want in self.diffs[:20]:
            lines.append(f"  at ({label_str(v)}, {c}): inflated={got} direct={want}")
        return "\n".join(lines)


def verify_inflation(aut, r, n, limit=DEFAULT_LEVEL_LIMIT):
    """Compare inflate(tile_r, M_n) with the directly built level r+n tile."""
    check_level_limit(aut.d, r + n, limit)
    direct = build_tile(aut, r + n, limit)
    try:
        produced = inflate(build_tile(aut, r, limit), model_graph(aut, n, limit), aut)
    except InflationError as exc:
        return InflationReport(False, r + n, error=str(exc))
    diffs = []
    for vi in range(len(direct.vertices)):
        for ci in range(len(direct.colors)):
            got = produced.pairing[vi][ci]
            want = direct.pairing[vi][ci]
            if got != want:
                diffs.append((direct.vertices[vi], direct.colors[ci], got, want))
    return InflationReport(not diffs, r + n, diffs)


def model_dot(model, name="M"):
    """DOT text for a model graph; node ids are p#k|x."""
    def node(seq_idx, x):
        return f"p#{seq_idx}|{word_str(x)}"

    lines = [f"graph {name} {{"]
    for pi, p in enumerate(model.sequences):
        for x in model.words:
            lines.append(f'  "{node(pi, x)}";  // {p}')
    for (a, b) in model.edge_pairs():
        lines.append(f'  "{node(*a)}" -- "{node(*b)}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
