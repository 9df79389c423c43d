"""Invertible automata presented by wreath recursions, and their tree actions.

An automaton acts on finite words over the alphabet {0, ..., d-1}; the
action consumes the leftmost letter first:

    g(x w) = perm_g(x) . (g|_x)(w)

Generating sets are closed under inversion at parse time: the inverse of
every non-involutive generator is synthesized with
perm_{g^-1} = perm_g^-1 and (g^-1)|_x = (g|_{g^-1(x)})^-1, so the edge
colors of every Schreier graph are exactly the states of the compiled
automaton.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product

from .errors import (AutomatonSyntaxError, AutomatonValidationError,
                     LevelLimitExceeded)

DEFAULT_LEVEL_LIMIT = 65536

Word = tuple

_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_RE_ALPHABET = re.compile(r"^alphabet:\s*(\d+)\s*$")
_RE_TRIVIAL = re.compile(rf"^trivial:\s*({_NAME})\s*$")
_RE_GEN = re.compile(
    rf"^gen\s+({_NAME})\s*:\s*perm=((?:\([^)]*\))+|id)\s+sections=\[([^\]]*)\]\s*$")
_RE_INVOLUTIONS = re.compile(rf"^involutions:\s*((?:{_NAME}(?:\s+{_NAME})*)?)\s*$")
_RE_SYMBOL = re.compile(rf"^({_NAME})(\^-1)?$")


def check_level_limit(d, n, limit=DEFAULT_LEVEL_LIMIT):
    if d ** n > limit:
        raise LevelLimitExceeded(f"{d}^{n} exceeds the level limit {limit}")


def all_words(d, n):
    """All words of length n over 0..d-1 in lexicographic order."""
    return [tuple(w) for w in product(range(d), repeat=n)]


@dataclass(frozen=True)
class Alphabet:
    size: int

    def __post_init__(self):
        if self.size < 2:
            raise AutomatonValidationError("alphabet size must be at least 2")

    @property
    def letters(self):
        return range(self.size)


@dataclass(frozen=True)
class GeneratorSymbol:
    """A generator or its formal inverse, as written in a definition file."""

    name: str
    exponent: int = 1

    def __str__(self):
        return self.name if self.exponent == 1 else f"{self.name}^-1"

    @staticmethod
    def parse(text):
        m = _RE_SYMBOL.match(text.strip())
        if m is None:
            raise AutomatonSyntaxError(f"bad generator symbol {text!r}")
        return GeneratorSymbol(m.group(1), -1 if m.group(2) else 1)


@dataclass(frozen=True)
class ActivityClass:
    kind: str  # "bounded" | "polynomial" | "exponential"
    degree: int = 0  # k >= 1 for polynomial growth

    def __str__(self):
        if self.kind == "polynomial":
            return f"polynomial({self.degree})"
        return self.kind


BOUNDED = ActivityClass("bounded")
EXPONENTIAL = ActivityClass("exponential")


def _parse_perm(text, d):
    if text == "id":
        return tuple(range(d))
    if not re.fullmatch(r"(\(\s*\d+(?:\s+\d+)*\s*\))+", text):
        raise AutomatonSyntaxError(f"bad permutation {text!r}")
    images = list(range(d))
    seen = set()
    for cyc in re.findall(r"\(([^)]*)\)", text):
        entries = [int(tok) for tok in cyc.split()]
        if any(e >= d for e in entries):
            raise AutomatonSyntaxError(f"permutation letter out of range in {text!r}")
        if len(set(entries)) != len(entries) or seen & set(entries):
            raise AutomatonSyntaxError(f"repeated letter in permutation {text!r}")
        seen |= set(entries)
        for i, e in enumerate(entries):
            images[e] = entries[(i + 1) % len(entries)]
    if sorted(images) != list(range(d)):
        raise AutomatonValidationError(f"permutation {text!r} is not a bijection")
    return tuple(images)


def _perm_to_text(perm):
    d = len(perm)
    seen = [False] * d
    cycles = []
    for start in range(d):
        if seen[start] or perm[start] == start:
            seen[start] = True
            continue
        cyc = [start]
        seen[start] = True
        x = perm[start]
        while x != start:
            cyc.append(x)
            seen[x] = True
            x = perm[x]
        cycles.append(cyc)
    if not cycles:
        return "id"
    return "".join("(" + " ".join(map(str, c)) + ")" for c in cycles)


def _invert_perm(perm):
    out = [0] * len(perm)
    for i, x in enumerate(perm):
        out[x] = i
    return tuple(out)


class Automaton:
    """Compiled automaton: indexed states with permutation and section tables.

    State 0 is the trivial state.  `symbols` lists the Schreier edge colors:
    the declared generators followed by the synthesized inverses of the
    non-involutive ones.
    """

    def __init__(self, alphabet, state_names, perms, sections, generators,
                 involutions, trivial_name):
        self.alphabet = alphabet
        self.state_names = list(state_names)
        self.perms = [tuple(p) for p in perms]
        self.sections = [tuple(s) for s in sections]
        self.generators = list(generators)
        self.involutions = frozenset(involutions)
        self.trivial_name = trivial_name
        self.index = {name: i for i, name in enumerate(self.state_names)}
        self.inverse = self._compute_inverses()
        self.symbols = [n for n in self.state_names[1:]]
        self._validate()

    # -- construction ----------------------------------------------------

    def _compute_inverses(self):
        inv = [0] * len(self.state_names)
        for i in range(1, len(self.state_names)):
            name = self.state_names[i]
            if name in self.involutions:
                inv[i] = i
            elif name.endswith("^-1"):
                inv[i] = self.index[name[:-3]]
            else:
                other = name + "^-1"
                inv[i] = self.index[other] if other in self.index else i
        return inv

    def _validate(self):
        d = self.alphabet.size
        for i, perm in enumerate(self.perms):
            if sorted(perm) != list(range(d)):
                raise AutomatonValidationError(
                    f"state {self.state_names[i]!r} has a non-bijective permutation")
        if self.perms[0] != tuple(range(d)) or any(s != 0 for s in self.sections[0]):
            raise AutomatonValidationError("trivial state must act trivially")
        for i in range(len(self.state_names)):
            j = self.inverse[i]
            if self.perms[j] != _invert_perm(self.perms[i]):
                raise AutomatonValidationError(
                    f"inverse tables broken at state {self.state_names[i]!r}")
        for name in self.involutions:
            i = self.index[name]
            if not self._composes_to_identity(i, i):
                raise AutomatonValidationError(
                    f"generator {name!r} is marked involutive but g*g != identity")

    def _composes_to_identity(self, a, b):
        # exact check on the reachable pair-state automaton for a.b = id
        seen = set()
        stack = [(a, b)]
        idperm = tuple(range(self.alphabet.size))
        while stack:
            s, t = stack.pop()
            if (s, t) in seen:
                continue
            seen.add((s, t))
            if tuple(self.perms[s][self.perms[t][x]] for x in range(self.alphabet.size)) != idperm:
                return False
            for x in range(self.alphabet.size):
                nxt = (self.sections[s][self.perms[t][x]], self.sections[t][x])
                if nxt != (0, 0):
                    stack.append(nxt)
        return True

    # -- basic queries ----------------------------------------------------

    @property
    def d(self):
        return self.alphabet.size

    @property
    def num_states(self):
        return len(self.state_names)

    def symbol_index(self, name):
        if isinstance(name, GeneratorSymbol):
            name = self.resolve_symbol(name)
        i = self.index.get(name)
        if i is None or i == 0:
            raise AutomatonValidationError(f"{name!r} is not a generator symbol")
        return i

    def resolve_symbol(self, sym):
        """Map a parsed GeneratorSymbol to the name of the acting state."""
        if sym.name == self.trivial_name:
            return self.trivial_name
        if sym.name not in self.index:
            raise AutomatonValidationError(f"undeclared state {sym.name!r}")
        if sym.exponent == 1:
            return sym.name
        return self.state_names[self.inverse[self.index[sym.name]]]

    def __eq__(self, other):
        if not isinstance(other, Automaton):
            return NotImplemented
        return (self.alphabet == other.alphabet
                and self.state_names == other.state_names
                and self.perms == other.perms
                and self.sections == other.sections
                and self.generators == other.generators
                and self.involutions == other.involutions
                and self.trivial_name == other.trivial_name)

    # -- the tree action --------------------------------------------------

    def act_letter(self, symbol, x):
        """One step of the action: (symbol, letter) -> (image, section name)."""
        if x >= self.d:
            raise AutomatonValidationError(f"letter {x} outside alphabet of size {self.d}")
        i = self.index[symbol] if isinstance(symbol, str) else symbol
        return self.perms[i][x], self.state_names[self.sections[i][x]]

    def act_state_word(self, state, word):
        """Action of a single state on a word: (image word, final state index)."""
        i = self.index[state] if isinstance(state, str) else state
        perms, sections = self.perms, self.sections
        out = []
        for x in word:
            out.append(perms[i][x])
            i = sections[i][x]
        return tuple(out), i

    def reduce_word(self, word):
        """Free reduction of a group word (names), cancelling g g^-1 only."""
        stack = []
        for name in word:
            i = self.index[name]
            if i == 0:
                continue
            if stack and self.inverse[self.index[stack[-1]]] == i:
                stack.pop()
            else:
                stack.append(name)
        return tuple(stack)

    def act_word(self, gword, word):
        """Action of a product of symbols (rightmost acts first) on a word.

        Returns the image word and the restriction as a freely reduced
        group word.
        """
        image = tuple(word)
        restriction = []
        for name in reversed(gword):
            image, final = self.act_state_word(name, image)
            if final != 0:
                restriction.append(self.state_names[final])
        restriction.reverse()
        return image, self.reduce_word(tuple(restriction))

    # -- Moore diagram analysis --------------------------------------------

    def nontrivial_edges(self):
        """Directed edges of the Moore diagram restricted to nontrivial states."""
        edges = []
        for i in range(1, self.num_states):
            for x in range(self.d):
                j = self.sections[i][x]
                if j != 0:
                    edges.append((i, x, j))
        return edges

    def _sccs(self):
        # Tarjan over nontrivial states
        succ = {i: [] for i in range(1, self.num_states)}
        for i, _x, j in self.nontrivial_edges():
            succ[i].append(j)
        index = {}
        low = {}
        onstack = {}
        stack = []
        sccs = []
        counter = [0]

        def strongconnect(v):
            work = [(v, iter(succ[v]))]
            index[v] = low[v] = counter[0]
            counter[0] += 1
            stack.append(v)
            onstack[v] = True
            while work:
                node, it = work[-1]
                advanced = False
                for w in it:
                    if w not in index:
                        index[w] = low[w] = counter[0]
                        counter[0] += 1
                        stack.append(w)
                        onstack[w] = True
                        work.append((w, iter(succ[w])))
                        advanced = True
                        break
                    if onstack.get(w):
                        low[node] = min(low[node], index[w])
                if advanced:
                    continue
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[node])
                if low[node] == index[node]:
                    comp = []
                    while True:
                        w = stack.pop()
                        onstack[w] = False
                        comp.append(w)
                        if w == node:
                            break
                    sccs.append(frozenset(comp))

        for v in range(1, self.num_states):
            if v not in index:
                strongconnect(v)
        return sccs

    def activity_class(self):
        """Activity growth from the cycle structure of the Moore diagram."""
        edges = self.nontrivial_edges()
        sccs = self._sccs()
        scc_of = {}
        for k, comp in enumerate(sccs):
            for v in comp:
                scc_of[v] = k
        internal = {k: 0 for k in range(len(sccs))}
        per_vertex_internal = {}
        for i, _x, j in edges:
            if scc_of[i] == scc_of[j]:
                internal[scc_of[i]] += 1
                per_vertex_internal[i] = per_vertex_internal.get(i, 0) + 1
        is_cycle = {}
        for k, comp in enumerate(sccs):
            if len(comp) > 1 or internal[k] > 0:
                # the component carries at least one directed cycle; it is a
                # single simple cycle iff every member has internal out-degree 1
                if any(per_vertex_internal.get(v, 0) != 1 for v in comp):
                    return EXPONENTIAL
                is_cycle[k] = True
            else:
                is_cycle[k] = False
        # longest chain of cycles linked by directed paths, over the SCC dag
        dag = {k: set() for k in range(len(sccs))}
        for i, _x, j in edges:
            if scc_of[i] != scc_of[j]:
                dag[scc_of[i]].add(scc_of[j])
        memo = {}

        def chain(k):
            if k in memo:
                return memo[k]
            memo[k] = 0  # cycle-free guard; the scc dag is acyclic
            best = max((chain(t) for t in dag[k]), default=0)
            memo[k] = best + (1 if is_cycle[k] else 0)
            return memo[k]

        longest = max((chain(k) for k in range(len(sccs))), default=0)
        if longest <= 1:
            return BOUNDED
        return ActivityClass("polynomial", longest - 1)

    # -- orbits and root permutations ---------------------------------------

    def is_level_transitive(self, n, limit=DEFAULT_LEVEL_LIMIT):
        check_level_limit(self.d, n, limit)
        if n == 0:
            return True
        start = (0,) * n
        seen = {start}
        stack = [start]
        while stack:
            w = stack.pop()
            for name in self.symbols:
                img, _ = self.act_state_word(name, w)
                if img not in seen:
                    seen.add(img)
                    stack.append(img)
        return len(seen) == self.d ** n

    def root_permutation_group(self):
        """Closure of the generators' root permutations under composition."""
        gens = [self.perms[self.index[name]] for name in self.symbols]
        identity = tuple(range(self.d))
        elements = {identity}
        frontier = [identity]
        while frontier:
            p = frontier.pop()
            for g in gens:
                q = tuple(g[p[x]] for x in range(self.d))
                if q not in elements:
                    elements.add(q)
                    frontier.append(q)
        return sorted(elements), len(elements)

    # -- serialization -------------------------------------------------------

    def serialize(self):
        lines = [f"alphabet: {self.d}", f"trivial: {self.trivial_name}"]
        for name in self.generators:
            i = self.index[name]
            secs = ", ".join(self.state_names[s] for s in self.sections[i])
            lines.append(f"gen {name}: perm={_perm_to_text(self.perms[i])} sections=[{secs}]")
        if self.involutions:
            marked = [n for n in self.generators if n in self.involutions]
            lines.append("involutions: " + " ".join(marked))
        return "\n".join(lines) + "\n"


def parse_automaton(text):
    """Parse an automaton definition document; see the README for the grammar."""
    alphabet = None
    trivial = None
    gens = []  # (name, perm text, section texts, line no)
    involutions = []
    seen_names = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _RE_ALPHABET.match(line)
        if m:
            if alphabet is not None:
                raise AutomatonSyntaxError("duplicate alphabet line", line_no)
            alphabet = int(m.group(1))
            continue
        m = _RE_TRIVIAL.match(line)
        if m:
            if trivial is not None:
                raise AutomatonSyntaxError("duplicate trivial line", line_no)
            trivial = m.group(1)
            continue
        m = _RE_GEN.match(line)
        if m:
            name = m.group(1)
            if name in seen_names:
                raise AutomatonSyntaxError(f"duplicate state {name!r}", line_no)
            seen_names.add(name)
            gens.append((name, m.group(2), m.group(3), line_no))
            continue
        m = _RE_INVOLUTIONS.match(line)
        if m:
            involutions.extend(m.group(1).split())
            continue
        col = len(raw) - len(raw.lstrip()) + 1
        raise AutomatonSyntaxError(f"unrecognized line {line!r}", line_no, col)

    if alphabet is None:
        raise AutomatonSyntaxError("missing 'alphabet:' line")
    if trivial is None:
        raise AutomatonSyntaxError("missing 'trivial:' line")
    if trivial in seen_names:
        raise AutomatonSyntaxError(f"trivial state {trivial!r} also declared as gen")
    alpha = Alphabet(alphabet)
    d = alphabet

    declared = [trivial] + [g[0] for g in gens]
    involution_set = set(involutions)
    for name in involution_set:
        if name not in declared[1:]:
            raise AutomatonSyntaxError(f"involutions line names undeclared state {name!r}")

    # first pass: permutations, raw section symbols
    perms = {trivial: tuple(range(d))}
    raw_sections = {}
    for name, perm_text, secs_text, line_no in gens:
        try:
            perms[name] = _parse_perm(perm_text, d)
        except (AutomatonSyntaxError, AutomatonValidationError) as exc:
            raise type(exc)(f"state {name!r}: {exc}") from None
        secs = [s.strip() for s in secs_text.split(",")] if secs_text.strip() else []
        if len(secs) != d:
            raise AutomatonSyntaxError(
                f"state {name!r} needs {d} sections, got {len(secs)}", line_no)
        raw_sections[name] = [GeneratorSymbol.parse(s) for s in secs]

    # which declared generators need a synthesized inverse
    synthesized = [name for name, *_ in gens if name not in involution_set]

    def resolve(sym, line_no):
        if sym.name == trivial:
            return trivial
        if sym.name not in perms:
            raise AutomatonSyntaxError(f"undeclared state reference {sym}", line_no)
        if sym.exponent == 1:
            return sym.name
        if sym.name in involution_set:
            return sym.name
        return sym.name + "^-1"

    state_names = declared + [n + "^-1" for n in synthesized]
    name_index = {n: i for i, n in enumerate(state_names)}

    full_perms = [tuple(range(d))]
    full_sections = [tuple([0] * d)]
    for name, _p, _s, line_no in gens:
        full_perms.append(perms[name])
        full_sections.append(tuple(
            name_index[resolve(sym, line_no)] for sym in raw_sections[name]))
    inv_name = {}
    for n in state_names:
        if n == trivial:
            inv_name[n] = trivial
        elif n in involution_set:
            inv_name[n] = n
        elif n.endswith("^-1"):
            inv_name[n] = n[:-3]
        else:
            inv_name[n] = n + "^-1"
    for base in synthesized:
        bi = name_index[base]
        perm = full_perms[bi]
        perm_inv = _invert_perm(perm)
        secs = []
        for x in range(d):
            sec_of_base = full_sections[bi][perm_inv[x]]
            secs.append(name_index[inv_name[state_names[sec_of_base]]])
        full_perms.append(perm_inv)
        full_sections.append(tuple(secs))

    return Automaton(alpha, state_names, full_perms, full_sections,
                     [g[0] for g in gens], involution_set, trivial)


def activity_path_counts(aut, max_len):
    """Number of directed length-n paths avoiding the trivial state, n = 0..max_len.

    Exact dynamic programming on the Moore diagram; used to cross-check
    activity_class.
    """
    counts = []
    # paths ending at each state
    current = {i: 1 for i in range(1, aut.num_states)}
    edges = aut.nontrivial_edges()
    counts.append(sum(current.values()))
    for _ in range(max_len):
        nxt = {i: 0 for i in range(1, aut.num_states)}
        for i, _x, j in edges:
            nxt[j] += current[i]
        current = nxt
        counts.append(sum(current.values()))
    return counts
