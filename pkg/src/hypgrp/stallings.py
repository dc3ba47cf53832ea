"""Stallings core graphs of finitely generated subgroups of free groups.

Edges carry labels in the free group on the subgroup's basis, so membership
queries return an explicit expression.  When the input generators are
already a free basis (folding never drops rank) the basis *is* the input
generator list; Britton pinching relies on this to read off preimages.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .words import (Alphabet, AlphabetMismatch, Word, concat_letters,
                    invert_letters, reduce_letters, shortlex_key)


@dataclass(frozen=True)
class MembershipWitness:
    in_subgroup: bool
    expression: tuple[int, ...] | None = None  # over the basis, letters +-(i+1)

    def __bool__(self) -> bool:
        return self.in_subgroup

    def expression_word(self, basis_alphabet: Alphabet) -> Word | None:
        if self.expression is None:
            return None
        return Word.from_reduced(basis_alphabet, self.expression)


class _Edge:
    __slots__ = ("src", "g", "dst", "label", "alive")

    def __init__(self, src, g, dst, label):
        self.src, self.g, self.dst, self.label = src, g, dst, label
        self.alive = True


def _fold(n_gens_letters: list[tuple[int, ...]]):
    """Fold the wedge of petals.  Returns (edges, base, rank_dropped)."""
    out: dict[int, dict[int, list[_Edge]]] = {0: {}}
    inc: dict[int, dict[int, list[_Edge]]] = {0: {}}
    nxt = 1

    def add(e: _Edge):
        out[e.src].setdefault(e.g, []).append(e)
        inc[e.dst].setdefault(e.g, []).append(e)

    def drop(e: _Edge):
        out[e.src][e.g].remove(e)
        inc[e.dst][e.g].remove(e)
        e.alive = False

    edges: list[_Edge] = []
    for i, word in enumerate(n_gens_letters):
        if not word:
            continue
        prev = 0
        for k, x in enumerate(word):
            last = k == len(word) - 1
            if last:
                nv = 0
            else:
                nv = nxt
                nxt += 1
                out[nv], inc[nv] = {}, {}
            label = (i + 1,) if k == 0 else ()
            g = abs(x) - 1
            # letter x^-1 from prev to nv is the edge nv -x-> prev, traversed backwards
            e = _Edge(prev, g, nv, label) if x > 0 else _Edge(nv, g, prev, invert_letters(label))
            edges.append(e)
            add(e)
            prev = nv

    rank_dropped = False

    def merge(keep: int, gone: int, shift: tuple[int, ...]):
        inv_shift = invert_letters(shift)
        for g, lst in list(out[gone].items()):
            for e in list(lst):
                drop(e)
                e.alive = True
                e.src = keep
                e.label = concat_letters(shift, e.label)
                if e.dst == gone:
                    e.dst = keep
                    e.label = concat_letters(e.label, inv_shift)
                add(e)
        for g, lst in list(inc[gone].items()):
            for e in list(lst):
                drop(e)
                e.alive = True
                e.dst = keep
                e.label = concat_letters(e.label, inv_shift)
                add(e)
        del out[gone], inc[gone]
        work.append(keep)

    work = deque(out.keys())
    while work:
        v = work.popleft()
        if v not in out:
            continue
        changed = False
        for g, lst in list(out[v].items()):
            if len(lst) >= 2:
                e1, e2 = lst[0], lst[1]
                if e2.dst == 0 and e1.dst != 0:
                    e1, e2 = e2, e1
                drop(e2)
                shift = concat_letters(invert_letters(e1.label), e2.label)
                if e1.dst == e2.dst:
                    rank_dropped = True
                    work.append(v)
                else:
                    merge(e1.dst, e2.dst, shift)
                    work.append(v)
                changed = True
                break
        if changed or v not in out:
            continue
        for g, lst in list(inc[v].items()):
            if len(lst) >= 2:
                e1, e2 = lst[0], lst[1]
                if e2.src == 0 and e1.src != 0:
                    e1, e2 = e2, e1
                drop(e2)
                shift = concat_letters(e1.label, invert_letters(e2.label))
                if e1.src == e2.src:
                    rank_dropped = True
                    work.append(v)
                else:
                    merge(e1.src, e2.src, shift)
                    work.append(v)
                break
    alive = [e for e in edges if e.alive]
    return alive, rank_dropped


def _prune(edges: list[_Edge], base: int = 0) -> list[_Edge]:
    """Strip hairs: repeatedly drop non-basepoint vertices of degree <= 1."""
    edges = list(edges)
    while True:
        deg: dict[int, int] = {}
        for e in edges:
            deg[e.src] = deg.get(e.src, 0) + 1
            deg[e.dst] = deg.get(e.dst, 0) + 1
        bad = {v for v, d in deg.items() if d <= 1 and v != base}
        if not bad:
            return edges
        edges = [e for e in edges if e.src not in bad and e.dst not in bad]


class SubgroupGraph:
    """Folded core graph with basepoint 0.

    ``out[v][g] = w`` means an edge ``v -g-> w`` for generator index ``g``;
    ``label[(v, g)]`` is its label over the basis letters.
    """

    def __init__(self, alphabet: Alphabet, out: list[dict[int, int]],
                 label: dict[tuple[int, int], tuple[int, ...]],
                 basis: list[Word], basis_kind: str):
        self.alphabet = alphabet
        self.out = out
        self.inc: list[dict[int, int]] = [dict() for _ in out]
        for v, d in enumerate(out):
            for g, w in d.items():
                if g in self.inc[w]:
                    raise AssertionError("graph not folded")
                self.inc[w][g] = v
        self.label = label
        self.basis = basis
        self.basis_kind = basis_kind
        self.basis_alphabet = Alphabet([f"x{i + 1}" for i in range(max(len(basis), 1))])

    # --- structure -------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.out)

    @property
    def n_edges(self) -> int:
        return sum(len(d) for d in self.out)

    @property
    def rank(self) -> int:
        return self.n_edges - self.n_vertices + 1

    def is_trivial(self) -> bool:
        return self.n_edges == 0

    def edges(self) -> list[tuple[int, int, int]]:
        return [(v, g, w) for v, d in enumerate(self.out) for g, w in sorted(d.items())]

    def canonical_key(self) -> tuple:
        """Isomorphism invariant of the based labeled graph (renumbered by BFS)."""
        return tuple(sorted(self.edges()))

    def step(self, v: int, x: int) -> int | None:
        if x > 0:
            return self.out[v].get(x - 1)
        return self.inc[v].get(-x - 1)

    def read(self, letters: Sequence[int], start: int = 0) -> int | None:
        v = start
        for x in letters:
            v = self.step(v, x)
            if v is None:
                return None
        return v

    def _edge_label(self, v: int, x: int) -> tuple[int, ...]:
        if x > 0:
            return self.label[(v, x - 1)]
        src = self.inc[v][-x - 1]
        return invert_letters(self.label[(src, -x - 1)])

    # --- queries ---------------------------------------------------------
    def contains(self, w: Word) -> MembershipWitness:
        if w.alphabet != self.alphabet:
            raise AlphabetMismatch(f"{w.alphabet.names} vs {self.alphabet.names}")
        v = 0
        expr: list[int] = []
        for x in w.letters:
            lab = self._edge_label(v, x) if self.step(v, x) is not None else None
            if lab is None:
                return MembershipWitness(False)
            for y in lab:
                if expr and expr[-1] == -y:
                    expr.pop()
                else:
                    expr.append(y)
            v = self.step(v, x)
        if v != 0:
            return MembershipWitness(False)
        return MembershipWitness(True, tuple(expr))

    def evaluate(self, expression: Sequence[int]) -> Word:
        """Multiply out an expression over the basis."""
        out: list[int] = []
        for y in expression:
            b = self.basis[abs(y) - 1].letters
            for x in (b if y > 0 else invert_letters(b)):
                if out and out[-1] == -x:
                    out.pop()
                else:
                    out.append(x)
        return Word.from_reduced(self.alphabet, tuple(out))

    def path_words(self) -> list[tuple[int, ...]]:
        """A geodesic (BFS-tree) spelling from the basepoint to every vertex."""
        paths: list[tuple[int, ...] | None] = [None] * self.n_vertices
        paths[0] = ()
        q = deque([0])
        while q:
            v = q.popleft()
            for x in _letter_order(len(self.alphabet)):
                w = self.step(v, x)
                if w is not None and paths[w] is None:
                    paths[w] = paths[v] + (x,)
                    q.append(w)
        return paths  # type: ignore[return-value]

    def loops(self, max_len: int) -> set[tuple[int, ...]]:
        """All reduced words of length <= max_len labeling basepoint loops."""
        found: set[tuple[int, ...]] = set()
        n = len(self.alphabet)
        stack: list[tuple[int, tuple[int, ...]]] = [(0, ())]
        while stack:
            v, word = stack.pop()
            if v == 0:
                found.add(word)
            if len(word) == max_len:
                continue
            for x in _letter_order(n):
                if word and word[-1] == -x:
                    continue
                w = self.step(v, x)
                if w is not None:
                    stack.append((w, word + (x,)))
        return found

    def __repr__(self) -> str:
        return (f"SubgroupGraph(rank={self.rank}, vertices={self.n_vertices}, "
                f"basis={[str(b) for b in self.basis]})")


def _letter_order(n: int) -> list[int]:
    out = []
    for i in range(1, n + 1):
        out += [i, -i]
    return out


def _from_edges(alphabet: Alphabet, triples: Iterable[tuple[int, int, int]],
                base: int, labels: dict | None = None,
                generators: list[Word] | None = None) -> SubgroupGraph:
    """Renumber vertices by BFS from ``base`` and attach labels."""
    triples = list(triples)
    adj_out: dict[int, dict[int, int]] = {}
    adj_in: dict[int, dict[int, int]] = {}
    for v, g, w in triples:
        adj_out.setdefault(v, {})[g] = w
        adj_in.setdefault(w, {})[g] = v
    order = {base: 0}
    q = deque([base])
    n = len(alphabet)
    while q:
        v = q.popleft()
        for x in _letter_order(n):
            w = adj_out.get(v, {}).get(x - 1) if x > 0 else adj_in.get(v, {}).get(-x - 1)
            if w is not None and w not in order:
                order[w] = len(order)
                q.append(w)
    out: list[dict[int, int]] = [dict() for _ in order]
    old_label: dict[tuple[int, int], tuple[int, ...]] = {}
    for v, g, w in triples:
        if v in order and w in order:
            out[order[v]][g] = order[w]
            if labels is not None:
                old_label[(order[v], g)] = labels[(v, g)]
    if generators is not None:
        return SubgroupGraph(alphabet, out, old_label, generators, "generators")
    return _with_tree_basis(alphabet, out)


def _with_tree_basis(alphabet: Alphabet, out: list[dict[int, int]]) -> SubgroupGraph:
    g = SubgroupGraph(alphabet, out, {}, [], "spanning-tree")
    paths = g.path_words()
    label: dict[tuple[int, int], tuple[int, ...]] = {}
    basis: list[Word] = []
    tree = set()
    for w in range(1, g.n_vertices):
        p = paths[w]
        x = p[-1]
        prev = g.read(p[:-1])
        tree.add((prev, x - 1) if x > 0 else (w, -x - 1))
    for v, gen, w in g.edges():
        if (v, gen) in tree:
            label[(v, gen)] = ()
        else:
            basis.append(Word(alphabet, paths[v] + (gen + 1,) + invert_letters(paths[w])))
            label[(v, gen)] = (len(basis),)
    return SubgroupGraph(alphabet, out, label, basis, "spanning-tree")


def build(generators: Sequence[Word], alphabet: Alphabet | None = None) -> SubgroupGraph:
    """Folded core graph of the subgroup generated by ``generators``."""
    if alphabet is None:
        if not generators:
            raise ValueError("need an alphabet for an empty generator list")
        alphabet = generators[0].alphabet
    for g in generators:
        if g.alphabet != alphabet:
            raise AlphabetMismatch(f"{g.alphabet.names} vs {alphabet.names}")
    gens = [g for g in generators if g.letters]
    edges, dropped = _fold([g.letters for g in gens])
    edges = _prune(edges)
    triples = [(e.src, e.g, e.dst) for e in edges]
    labels = {(e.src, e.g): e.label for e in edges}
    rank = len(triples) - len({0} | {e.src for e in edges} | {e.dst for e in edges}) + 1
    if not dropped and rank == len(gens):
        return _from_edges(alphabet, triples, 0, labels, list(gens))
    return _from_edges(alphabet, triples, 0)


def contains(g: SubgroupGraph, w: Word) -> MembershipWitness:
    return g.contains(w)


def intersect(g1: SubgroupGraph, g2: SubgroupGraph) -> SubgroupGraph:
    """Core of the basepoint component of the fiber product."""
    if g1.alphabet != g2.alphabet:
        raise AlphabetMismatch(f"{g1.alphabet.names} vs {g2.alphabet.names}")
    triples = _product_component(g1, g2, (0, 0))
    idx: dict[tuple[int, int], int] = {(0, 0): 0}
    flat = []
    for (a, gen, b) in triples:
        for p in (a, b):
            if p not in idx:
                idx[p] = len(idx)
        flat.append((idx[a], gen, idx[b]))
    es = _prune([_Edge(a, gen, b, ()) for a, gen, b in flat])
    return _from_edges(g1.alphabet, [(e.src, e.g, e.dst) for e in es], 0)


def _product_component(g1: SubgroupGraph, g2: SubgroupGraph, start):
    seen = {start}
    q = deque([start])
    triples = []
    while q:
        u1, u2 = q.popleft()
        for gen, w1 in g1.out[u1].items():
            w2 = g2.out[u2].get(gen)
            if w2 is not None:
                triples.append(((u1, u2), gen, (w1, w2)))
                if (w1, w2) not in seen:
                    seen.add((w1, w2))
                    q.append((w1, w2))
        for gen, s1 in g1.inc[u1].items():
            s2 = g2.inc[u2].get(gen)
            if s2 is not None and (s1, s2) not in seen:
                seen.add((s1, s2))
                q.append((s1, s2))
    return triples


@dataclass(frozen=True)
class MalnormalityResult:
    malnormal: bool
    conjugator: Word | None = None   # h not in H
    witness: Word | None = None      # nontrivial u in H and in h H h^-1

    def __bool__(self) -> bool:
        return self.malnormal


def is_malnormal(g: SubgroupGraph) -> MalnormalityResult:
    """Decide malnormality from the off-diagonal components of ``g x g``."""
    a = g.alphabet
    if g.is_trivial():
        return MalnormalityResult(True)
    paths = g.path_words()
    done: set[tuple[int, int]] = set()
    candidates = []
    for u in range(g.n_vertices):
        for v in range(g.n_vertices):
            if u == v or (u, v) in done:
                continue
            triples = _product_component(g, g, (u, v))
            comp = {(u, v)} | {t[0] for t in triples} | {t[2] for t in triples}
            done |= comp
            if len(triples) - len(comp) + 1 <= 0:
                continue
            for start in comp:
                loop = _component_loop(g, start)
                if loop is None:
                    continue
                p, q = paths[start[0]], paths[start[1]]
                h = Word(a, p + invert_letters(q))
                witness = Word(a, p + loop + invert_letters(p))
                candidates.append((h.shortlex_key(), witness.shortlex_key(), h, witness))
    if not candidates:
        return MalnormalityResult(True)
    candidates.sort(key=lambda c: (c[0], c[1]))
    _, _, h, u = candidates[0]
    return MalnormalityResult(False, h, u)


def _component_loop(g: SubgroupGraph, start) -> tuple[int, ...] | None:
    """Shortest reduced nontrivial loop at ``start`` in the product graph, if any."""
    n = len(g.alphabet)

    def step(p, x):
        a = g.step(p[0], x)
        b = g.step(p[1], x)
        return None if a is None or b is None else (a, b)

    # BFS tree then close with a non-tree edge
    parent = {start: None}
    order = [start]
    q = deque([start])
    while q:
        p = q.popleft()
        for x in _letter_order(n):
            r = step(p, x)
            if r is not None and r not in parent:
                parent[r] = (p, x)
                order.append(r)
                q.append(r)

    def path_to(p):
        out = []
        while parent[p] is not None:
            p, x = parent[p][0], parent[p][1]
            out.append(x)
        return tuple(reversed(out))

    best = None
    for p in order:
        for x in _letter_order(n):
            r = step(p, x)
            if r is None:
                continue
            if parent.get(r) == (p, x) or parent.get(p) == (r, -x):
                continue
            loop = reduce_letters(path_to(p) + (x,) + invert_letters(path_to(r)))
            if loop and (best is None or shortlex_key(loop) < shortlex_key(best)):
                best = loop
    return best


def preimage(images_graph: SubgroupGraph, w: Word) -> Word | None:
    """Preimage of ``w`` under the endomorphism whose images built ``images_graph``.

    Requires the images to be a free basis (``basis_kind == 'generators'``);
    the result is a word over the basis alphabet (generator i -> letter i).
    """
    if images_graph.basis_kind != "generators":
        raise ValueError("images are not a free basis; endomorphism not injective")
    m = images_graph.contains(w)
    if not m:
        return None
    return m.expression
