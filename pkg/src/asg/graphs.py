"""Schreier and tile graphs as half-edge rotation systems.

A RotationGraph stores, per vertex and color, at most one half-edge; the
pairing involution sends the half-edge (v, s) to (s(v), s^-1).  Edge
classification is read off the pairing orbits:

  * a fixed half-edge is a half-loop (degree 1, adjacency diagonal +1);
  * a 2-orbit with equal endpoints is a full loop (degree 2, diagonal +2);
  * a 2-orbit with distinct endpoints is a regular edge.

This is the one convention under which the level-1 graphs of the bundled
automata reproduce their published adjacency matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

from .automaton import DEFAULT_LEVEL_LIMIT, all_words, check_level_limit
from .errors import AutomatonValidationError, NotBounded


def word_str(w):
    return "".join(str(x) for x in w) if w else "e"


def label_str(label):
    if isinstance(label, tuple) and label and isinstance(label[0], tuple):
        return "|".join(word_str(part) for part in label)
    return word_str(label)


class RotationGraph:
    """Colored multigraph encoded by half-edges with a pairing involution."""

    __slots__ = ("vertices", "colors", "vindex", "pairing")

    def __init__(self, vertices, colors, pairing=None):
        self.vertices = list(vertices)
        self.colors = tuple(colors)
        self.vindex = {v: i for i, v in enumerate(self.vertices)}
        if pairing is None:
            pairing = [[None] * len(self.colors) for _ in self.vertices]
        self.pairing = pairing

    def set_pair(self, vi, ci, vj, cj):
        self.pairing[vi][ci] = (vj, cj)
        self.pairing[vj][cj] = (vi, ci)

    def partner(self, vi, ci):
        return self.pairing[vi][ci]

    def half_edges(self):
        for vi, row in enumerate(self.pairing):
            for ci, p in enumerate(row):
                if p is not None:
                    yield vi, ci

    def num_half_edges(self):
        return sum(1 for _ in self.half_edges())

    def check_involution(self):
        for vi, ci in self.half_edges():
            vj, cj = self.pairing[vi][ci]
            if self.pairing[vj][cj] != (vi, ci):
                raise AutomatonValidationError(
                    f"pairing is not an involution at {(vi, ci)}")

    def edges(self):
        """One record per pairing orbit: (vi, ci, vj, cj, kind).

        The representative half-edge is the one with the smaller
        (color index, vertex index), so records are deterministic.
        """
        out = []
        for vi, ci in self.half_edges():
            vj, cj = self.pairing[vi][ci]
            if (vi, ci) == (vj, cj):
                out.append((vi, ci, vj, cj, "halfloop"))
            elif (ci, vi) <= (cj, vj):
                kind = "loop" if vi == vj else "regular"
                out.append((vi, ci, vj, cj, kind))
        out.sort()
        return out

    def num_edges(self):
        return len(self.edges())

    def is_regular_structure(self):
        return all(p is not None for row in self.pairing for p in row)

    def __eq__(self, other):
        if not isinstance(other, RotationGraph):
            return NotImplemented
        return (self.vertices == other.vertices and self.colors == other.colors
                and self.pairing == other.pairing)

    def __repr__(self):
        return (f"RotationGraph({len(self.vertices)} vertices, "
                f"{self.num_edges()} edges, colors={list(self.colors)})")


@dataclass(frozen=True)
class GraphStats:
    vertex_count: int
    edge_count: int
    degrees: tuple
    adjacency: tuple  # tuple of row tuples
    q_diagonal: tuple  # degree - 1 per vertex
    rank_minus_one: int  # |E| - |V|


def graph_stats(g):
    n = len(g.vertices)
    deg = [0] * n
    adj = [[0] * n for _ in range(n)]
    edge_count = 0
    halfloops = fullloops = regular = 0
    for vi, ci, vj, cj, kind in g.edges():
        edge_count += 1
        if kind == "halfloop":
            deg[vi] += 1
            adj[vi][vi] += 1
            halfloops += 1
        elif kind == "loop":
            deg[vi] += 2
            adj[vi][vi] += 2
            fullloops += 1
        else:
            deg[vi] += 1
            deg[vj] += 1
            adj[vi][vj] += 1
            adj[vj][vi] += 1
            regular += 1
    total_half = g.num_half_edges()
    if 2 * regular + 2 * fullloops + halfloops != sum(deg) or sum(deg) != total_half:
        raise AutomatonValidationError("half-edge bookkeeping is inconsistent")
    return GraphStats(n, edge_count, tuple(deg),
                      tuple(tuple(row) for row in adj),
                      tuple(d - 1 for d in deg), edge_count - n)


def is_connected(g):
    n = len(g.vertices)
    if n <= 1:
        return True
    seen = [False] * n
    seen[0] = True
    stack = [0]
    count = 1
    while stack:
        vi = stack.pop()
        for ci, p in enumerate(g.pairing[vi]):
            if p is None:
                continue
            vj = p[0]
            if not seen[vj]:
                seen[vj] = True
                count += 1
                stack.append(vj)
    return count == n


def build_schreier(aut, n, limit=DEFAULT_LEVEL_LIMIT):
    """Schreier graph of the level-n action: vertices X^n in lex order."""
    check_level_limit(aut.d, n, limit)
    words = all_words(aut.d, n)
    g = RotationGraph(words, aut.symbols)
    color_of = {name: ci for ci, name in enumerate(aut.symbols)}
    for vi, w in enumerate(words):
        for ci, name in enumerate(aut.symbols):
            if g.pairing[vi][ci] is not None:
                continue
            img, _ = aut.act_state_word(name, w)
            inv = aut.state_names[aut.inverse[aut.index[name]]]
            g.set_pair(vi, ci, g.vindex[img], color_of[inv])
    g.check_involution()
    return g


def build_tile(aut, n, limit=DEFAULT_LEVEL_LIMIT):
    """Tile graph: the Schreier half-edges (v, s) with trivial restriction s|_v."""
    check_level_limit(aut.d, n, limit)
    words = all_words(aut.d, n)
    g = RotationGraph(words, aut.symbols)
    color_of = {name: ci for ci, name in enumerate(aut.symbols)}
    for vi, w in enumerate(words):
        for ci, name in enumerate(aut.symbols):
            if g.pairing[vi][ci] is not None:
                continue
            img, rest = aut.act_state_word(name, w)
            if rest != 0:
                continue
            inv = aut.state_names[aut.inverse[aut.index[name]]]
            g.set_pair(vi, ci, g.vindex[img], color_of[inv])
    g.check_involution()
    return g


# -- post-critical data ------------------------------------------------------


@dataclass(frozen=True)
class EventuallyPeriodicWord:
    """Left-infinite word  ... P P P . T  in canonical form.

    The rightmost letter is tail[-1] (or period[-1] when the tail is
    empty).  Canonical means: the period is primitive and the tail cannot
    be shortened by rotating the period.
    """

    period: tuple
    tail: tuple

    @staticmethod
    def make(period, tail=()):
        period = tuple(period)
        tail = tuple(tail)
        if not period:
            raise AutomatonValidationError("period must be nonempty")
        # primitive period
        n = len(period)
        for k in range(1, n):
            if n % k == 0 and period[:k] * (n // k) == period:
                period = period[:k]
                n = k
                break
        # absorb tail letters that extend the periodic part
        while tail and tail[0] == period[0]:
            period = period[1:] + period[:1]
            tail = tail[1:]
        return EventuallyPeriodicWord(period, tail)

    def truncate(self, n):
        """The last n letters, as a word (leftmost letter first)."""
        full = list(self.tail)
        while len(full) < n:
            full = list(self.period) + full
        return tuple(full[len(full) - n:]) if n else ()

    def sort_key(self):
        return (len(self.period), self.period, len(self.tail), self.tail)

    def __str__(self):
        p = "".join(map(str, self.period))
        t = "".join(map(str, self.tail))
        return f"({p})^-w" + (f".{t}" if t else "")


@dataclass(frozen=True)
class Germ:
    """A left-infinite path in the Moore diagram avoiding the trivial state.

    Stored as the simple cycle it eventually wraps (anchor first, so the
    edge into the anchor is the last cycle edge traversed), plus the
    finite exit path to the terminal state.  States are automaton indices.
    """

    cycle_states: tuple
    cycle_letters: tuple
    exit_states: tuple
    exit_letters: tuple

    @property
    def terminal(self):
        return self.exit_states[-1] if self.exit_states else self.cycle_states[0]

    def state_at(self, m):
        """State at backward distance m from the terminal (m = 0: terminal)."""
        k = len(self.exit_states)
        if m < k:
            return self.exit_states[k - 1 - m]
        return self.cycle_states[-(m - k) % len(self.cycle_states)]

    def sequence(self):
        return EventuallyPeriodicWord.make(self.cycle_letters, self.exit_letters)

    def output_letters(self, aut):
        """Input letters of the inverse germ (= outputs along this germ)."""
        cyc = tuple(aut.perms[s][x] for s, x in zip(self.cycle_states, self.cycle_letters))
        sources = (self.cycle_states[0],) + self.exit_states[:-1]
        ext = tuple(aut.perms[s][x] for s, x in zip(sources, self.exit_letters))
        return cyc, ext

    def inverse(self, aut):
        cyc_letters, exit_letters = self.output_letters(aut)
        return Germ(tuple(aut.inverse[s] for s in self.cycle_states), cyc_letters,
                    tuple(aut.inverse[s] for s in self.exit_states), exit_letters)

    def sort_key(self):
        return (self.cycle_states, self.cycle_letters, self.exit_states, self.exit_letters)


def enumerate_germs(aut):
    """All left-infinite nontrivial-state paths of a bounded automaton.

    Raises NotBounded otherwise.  Finiteness: in a bounded automaton the
    cycles of the Moore diagram are disjoint simple cycles and no path
    joins two of them, so a germ is a cycle, an anchor on it, and a simple
    cycle-free exit path.
    """
    if aut.activity_class().kind != "bounded":
        raise NotBounded("post-critical data requires a bounded automaton")
    edges = aut.nontrivial_edges()
    out_edges = {}
    for i, x, j in edges:
        out_edges.setdefault(i, []).append((x, j))
    sccs = aut._sccs()
    cycle_members = set()
    cycles = []
    for comp in sccs:
        internal = [(i, x, j) for (i, x, j) in edges if i in comp and j in comp]
        if len(comp) == 1 and not internal:
            continue
        nxt = {}
        for i, x, j in internal:
            if i in nxt:
                raise NotBounded("cycle is not simple")
            nxt[i] = (x, j)
        start = min(comp)
        states, letters = [start], []
        x, j = nxt[start]
        letters.append(x)
        while j != start:
            states.append(j)
            x, j = nxt[j]
            letters.append(x)
        cycles.append((tuple(states), tuple(letters)))
        cycle_members |= comp

    germs = []
    for states, letters in cycles:
        L = len(states)
        for phase in range(L):
            rot_states = states[phase:] + states[:phase]
            rot_letters = letters[phase:] + letters[:phase]
            germs.append(Germ(rot_states, rot_letters, (), ()))
            # every path leaving the cycle at the anchor, through
            # non-cycle nontrivial states (a finite dag by boundedness)
            stack = [((), ())]
            while stack:
                path_states, path_letters = stack.pop()
                src = path_states[-1] if path_states else rot_states[0]
                for x, j in out_edges.get(src, ()):
                    if j in cycle_members:
                        if path_states:
                            raise NotBounded("a path joins two cycles")
                        continue  # the cycle's own continuation
                    ns, nl = path_states + (j,), path_letters + (x,)
                    germs.append(Germ(rot_states, rot_letters, ns, nl))
                    stack.append((ns, nl))
    germs.sort(key=Germ.sort_key)
    return germs


def post_critical_sequences(aut):
    """The set of post-critical sequences of a bounded automaton."""
    seqs = {g.sequence() for g in enumerate_germs(aut)}
    return sorted(seqs, key=EventuallyPeriodicWord.sort_key)


def post_critical_vertices(sequences, n):
    """Length-n truncations with attribution: word -> tuple of sequences."""
    out = {}
    for p in sequences:
        out.setdefault(p.truncate(n), []).append(p)
    return {w: tuple(ps) for w, ps in sorted(out.items())}


# -- serialization ------------------------------------------------------------


def export_dot(g, name="G", edge_class=None):
    """Deterministic DOT text: one record per pairing orbit."""
    lines = [f"graph {name} {{"]
    for v in g.vertices:
        lines.append(f'  "{label_str(v)}";')
    for vi, ci, vj, cj, kind in g.edges():
        attrs = [f'color="{g.colors[ci]}"', f'kind="{kind}"']
        if edge_class is not None:
            attrs.append(f'class="{edge_class[(vi, ci)]}"')
        lines.append(f'  "{label_str(g.vertices[vi])}" -- '
                     f'"{label_str(g.vertices[vj])}" [{", ".join(attrs)}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
