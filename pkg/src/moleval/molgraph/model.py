"""Molecular graph model: atoms, bonds, rings, hydrogen bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .elements import default_valence

# Bond orders. Aromatic bonds use a sentinel order; arithmetic over bond
# order sums treats them as contributing 1 plus a valence correction, see
# effective_bond_sum below.
SINGLE, DOUBLE, TRIPLE, AROMATIC = 1, 2, 3, 4

_ORDER_VALUE = {SINGLE: 1, DOUBLE: 2, TRIPLE: 3, AROMATIC: 1}


@dataclass
class Atom:
    """One atom. explicit_h is None for atoms written without brackets;
    bracket atoms carry their hydrogen count explicitly (0 if omitted)."""

    element: str
    charge: int = 0
    isotope: int | None = None
    aromatic: bool = False
    explicit_h: int | None = None
    chirality: str | None = None  # parsed annotation, ignored downstream


@dataclass
class Bond:
    a: int
    b: int
    order: int = SINGLE
    stereo: str | None = None  # parsed annotation, ignored downstream

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a


@dataclass
class MolGraph:
    atoms: list[Atom] = field(default_factory=list)
    bonds: list[Bond] = field(default_factory=list)

    def __post_init__(self):
        self._adj: list[list[int]] | None = None
        self._rings: list[list[int]] | None = None

    # -- structure ---------------------------------------------------

    def adjacency(self) -> list[list[int]]:
        """Bond indices incident to each atom."""
        if self._adj is None:
            adj: list[list[int]] = [[] for _ in self.atoms]
            for bi, bond in enumerate(self.bonds):
                adj[bond.a].append(bi)
                adj[bond.b].append(bi)
            self._adj = adj
        return self._adj

    def neighbors(self, idx: int) -> list[int]:
        return [self.bonds[bi].other(idx) for bi in self.adjacency()[idx]]

    def degree(self, idx: int) -> int:
        return len(self.adjacency()[idx])

    def bond_between(self, a: int, b: int) -> Bond | None:
        for bi in self.adjacency()[a]:
            if self.bonds[bi].other(a) == b:
                return self.bonds[bi]
        return None

    def components(self) -> list[list[int]]:
        """Connected components as sorted atom-index lists."""
        seen = [False] * len(self.atoms)
        out = []
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            comp, stack = [], [start]
            seen[start] = True
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in self.neighbors(v):
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            out.append(sorted(comp))
        return out

    # -- rings ---------------------------------------------------------

    def rings(self) -> list[list[int]]:
        """Basis cycles from BFS spanning forests.

        BFS trees keep fundamental cycles close to the smallest rings,
        which is what ring counting and ring membership consume. The
        basis size equals the cyclomatic number.
        """
        if self._rings is not None:
            return self._rings
        n = len(self.atoms)
        parent_bond = [-1] * n
        parent = [-1] * n
        depth = [-1] * n
        rings: list[list[int]] = []
        seen_bond = [False] * len(self.bonds)
        for start in range(n):
            if depth[start] >= 0:
                continue
            depth[start] = 0
            queue = [start]
            qi = 0
            while qi < len(queue):
                v = queue[qi]
                qi += 1
                for bi in self.adjacency()[v]:
                    if seen_bond[bi]:
                        continue
                    w = self.bonds[bi].other(v)
                    if depth[w] < 0:
                        seen_bond[bi] = True
                        depth[w] = depth[v] + 1
                        parent[w] = v
                        parent_bond[w] = bi
                        queue.append(w)
                    elif w != v:
                        seen_bond[bi] = True
                        rings.append(self._cycle_through(v, w, parent, depth))
        self._rings = rings
        return rings

    def _cycle_through(self, v, w, parent, depth):
        # walk both endpoints up to their lowest common ancestor
        left, right = [v], [w]
        a, b = v, w
        while depth[a] > depth[b]:
            a = parent[a]
            left.append(a)
        while depth[b] > depth[a]:
            b = parent[b]
            right.append(b)
        while a != b:
            a = parent[a]
            b = parent[b]
            left.append(a)
            right.append(b)
        return left + right[-2::-1]

    def ring_atoms(self) -> set[int]:
        out: set[int] = set()
        for cyc in self.rings():
            out.update(cyc)
        return out

    def in_ring(self, idx: int) -> bool:
        return idx in self.ring_atoms()

    # -- valence and hydrogens -----------------------------------------

    def plain_bond_sum(self, idx: int) -> int:
        """Bond order sum with aromatic bonds counted as one."""
        return sum(_ORDER_VALUE[self.bonds[bi].order] for bi in self.adjacency()[idx])

    def aromatic_bond_count(self, idx: int) -> int:
        return sum(1 for bi in self.adjacency()[idx] if self.bonds[bi].order == AROMATIC)

    def effective_bond_sum(self, idx: int) -> int:
        """Bond order sum used for hydrogen derivation and validity.

        Aromatic bonds count one each. A carbon sitting inside an
        aromatic ring (exactly two aromatic bonds) owes one more unit for
        the delocalized double bond, unless its other bonds already fill
        the default valence (e.g. aromatic ring carbons bearing an
        exocyclic double bond).
        """
        atom = self.atoms[idx]
        total = self.plain_bond_sum(idx)
        dv = default_valence(atom.element, atom.charge)
        if (
            atom.element == "C"
            and self.aromatic_bond_count(idx) == 2
            and dv is not None
            and total < dv
        ):
            total += 1
        return total

    def implicit_h(self, idx: int) -> int:
        """Derived hydrogen count; zero for bracket atoms."""
        atom = self.atoms[idx]
        if atom.explicit_h is not None:
            return 0
        dv = default_valence(atom.element, atom.charge)
        if dv is None:
            return 0
        return max(0, dv - self.effective_bond_sum(idx))

    def total_h(self, idx: int) -> int:
        atom = self.atoms[idx]
        if atom.explicit_h is not None:
            return atom.explicit_h
        return self.implicit_h(idx)

    def total_valence(self, idx: int) -> int:
        return self.effective_bond_sum(idx) + self.total_h(idx)

    # -- editing -------------------------------------------------------

    def subgraph(self, keep: list[int]) -> "MolGraph":
        """Induced subgraph; atoms re-indexed preserving relative order."""
        index = {old: new for new, old in enumerate(keep)}
        atoms = [replace(self.atoms[i]) for i in keep]
        bonds = [
            Bond(index[b.a], index[b.b], b.order, b.stereo)
            for b in self.bonds
            if b.a in index and b.b in index
        ]
        return MolGraph(atoms, bonds)

    def permuted(self, perm: list[int]) -> "MolGraph":
        """Relabeled copy: atom at old index i moves to perm[i]."""
        n = len(self.atoms)
        atoms: list[Atom | None] = [None] * n
        for i, atom in enumerate(self.atoms):
            atoms[perm[i]] = replace(atom)
        bonds = [Bond(perm[b.a], perm[b.b], b.order, b.stereo) for b in self.bonds]
        return MolGraph(list(atoms), bonds)  # type: ignore[arg-type]
