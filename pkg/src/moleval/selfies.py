"""Robust SELFIES-style codec.

Decoding is total over token streams: bond requests are capped by the
remaining valence of both endpoints, unknown bracketed tokens derive
nothing, and hydrogen counts are assigned afterwards so that every
decoded graph passes the validity check. Encoding is the inverse on the
supported set (single-component graphs over the core element table,
hydrogen counts at their derived defaults, aromatic systems that admit
an alternating bond assignment).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .molgraph.elements import allowed_valences, max_valence
from .molgraph.model import AROMATIC, DOUBLE, SINGLE, TRIPLE, Atom, Bond, MolGraph


class EmptyStream(ValueError):
    pass


class StrayCharacter(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class NotEncodable(ValueError):
    pass


class TokenKind(Enum):
    ATOM = "atom"
    BONDED_ATOM = "bonded_atom"
    RING = "ring"
    BRANCH = "branch"
    INDEX = "index"  # reserved: every index digit doubles as another kind


@dataclass(frozen=True)
class SelfiesStream:
    tokens: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def text(self) -> str:
        return "".join(self.tokens)


_TOKEN_TEXT = re.compile(r"\[[^\[\]]*\]")
_ATOM_TOKEN = re.compile(r"\[([=#]?)([A-Z][a-z]?)(?:([+-])(\d))?\]")
_STRUCT_TOKEN = re.compile(r"\[([=#]?)(Ring|Branch)([123])\]")

_PREFIX_ORDER = {"": SINGLE, "=": DOUBLE, "#": TRIPLE}
_ORDER_PREFIX = {SINGLE: "", DOUBLE: "=", TRIPLE: "#"}

# Hexadecimal digit alphabet for ring lengths and branch sizes.
INDEX_ALPHABET = (
    "[C]",
    "[Ring1]",
    "[Ring2]",
    "[Branch1]",
    "[=Branch1]",
    "[#Branch1]",
    "[Branch2]",
    "[=Branch2]",
    "[#Branch2]",
    "[O]",
    "[N]",
    "[=N]",
    "[=C]",
    "[#C]",
    "[S]",
    "[P]",
)
_INDEX_VALUE = {tok: i for i, tok in enumerate(INDEX_ALPHABET)}

_CORE_ELEMENTS = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I", "H"}


def tokenize_selfies(text: str) -> SelfiesStream:
    """Split a SELFIES string into bracketed tokens.

    Raises StrayCharacter at the first byte outside any [token].
    """
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_TEXT.match(text, pos)
        if not m:
            raise StrayCharacter(f"unexpected character {text[pos]!r}", pos)
        tokens.append(m.group(0))
        pos = m.end()
    return SelfiesStream(tuple(tokens))


def classify_token(token: str) -> TokenKind:
    m = _STRUCT_TOKEN.fullmatch(token)
    if m:
        return TokenKind.RING if m.group(2) == "Ring" else TokenKind.BRANCH
    m = _ATOM_TOKEN.fullmatch(token)
    if m and m.group(1):
        return TokenKind.BONDED_ATOM
    # unknown bracketed text counts as an atom token deriving nothing
    return TokenKind.ATOM


# -- decoding ----------------------------------------------------------------


class _Decoder:
    def __init__(self):
        self.atoms: list[Atom] = []
        self.bonds: list[Bond] = []
        self.caps: list[int] = []

    def add_atom(self, element: str, charge: int) -> int:
        self.atoms.append(Atom(element=element, charge=charge))
        self.caps.append(max_valence(element, charge) or 0)
        return len(self.atoms) - 1

    def add_bond(self, a: int, b: int, order: int) -> None:
        self.bonds.append(Bond(a, b, order))
        value = {SINGLE: 1, DOUBLE: 2, TRIPLE: 3}[order]
        self.caps[a] -= value
        self.caps[b] -= value

    def has_bond(self, a: int, b: int) -> bool:
        return any({bond.a, bond.b} == {a, b} for bond in self.bonds)

    def derive(self, tokens: list[str], attach: int | None, first_cap: int | None):
        """Derive a token slice; attach is the atom the slice bonds from."""
        cur = attach
        idx = 0
        while idx < len(tokens):
            token = tokens[idx]
            idx += 1
            struct = _STRUCT_TOKEN.fullmatch(token)
            if struct:
                prefix, kind, size = struct.groups()
                width = int(size)
                value = self._read_index(tokens, idx, width)
                idx += width
                if kind == "Ring":
                    self._close_ring(cur, value + 1, _PREFIX_ORDER[prefix])
                else:
                    body = tokens[idx : idx + value + 1]
                    idx += len(body)
                    if cur is not None and self.caps[cur] >= 2 and body:
                        self.derive(body, cur, _PREFIX_ORDER[prefix])
                continue

            atom = _ATOM_TOKEN.fullmatch(token)
            if not atom:
                continue  # unknown token: nothing to derive
            prefix, element, sign, digits = atom.groups()
            if element not in _CORE_ELEMENTS:
                continue
            charge = 0
            if sign:
                charge = int(digits) * (1 if sign == "+" else -1)
            capacity = max_valence(element, charge) or 0
            if cur is None:
                cur = self.add_atom(element, charge)
                continue
            if self.caps[cur] == 0:
                return  # exhausted attachment ends this derivation scope
            if capacity == 0:
                continue
            req = _PREFIX_ORDER[prefix]
            if first_cap is not None:
                req = min(req, first_cap)
                first_cap = None
            order_value = min(req, self.caps[cur], capacity)
            new = self.add_atom(element, charge)
            order = {1: SINGLE, 2: DOUBLE, 3: TRIPLE}[order_value]
            self.bonds.append(Bond(cur, new, order))
            self.caps[cur] -= order_value
            self.caps[new] -= order_value
            cur = new

    def _read_index(self, tokens: list[str], idx: int, width: int) -> int:
        value = 0
        for k in range(width):
            digit = 0
            if idx + k < len(tokens):
                digit = _INDEX_VALUE.get(tokens[idx + k], 0)
            value = value * 16 + digit
        return value

    def _close_ring(self, cur: int | None, length: int, order: int) -> None:
        if cur is None:
            return
        target = max(0, cur - length)
        if target == cur or self.has_bond(cur, target):
            return
        value = {SINGLE: 1, DOUBLE: 2, TRIPLE: 3}[order]
        value = min(value, self.caps[cur], self.caps[target])
        if value == 0:
            return
        self.add_bond(cur, target, {1: SINGLE, 2: DOUBLE, 3: TRIPLE}[value])

    def finish(self) -> MolGraph:
        graph = MolGraph(self.atoms, self.bonds)
        for idx, atom in enumerate(self.atoms):
            total = graph.plain_bond_sum(idx)
            allowed = allowed_valences(atom.element, atom.charge) or (total,)
            target = next((v for v in allowed if v >= total), allowed[-1])
            atom.explicit_h = max(0, target - total)
        return graph


def decode_selfies(stream: SelfiesStream | str) -> MolGraph:
    """Decode a token stream into a molecular graph.

    Never fails on a non-empty stream; the result always satisfies the
    validity check.
    """
    if isinstance(stream, str):
        stream = tokenize_selfies(stream)
    tokens = list(stream)
    if not tokens:
        raise EmptyStream("no tokens to decode")
    decoder = _Decoder()
    decoder.derive(tokens, None, None)
    return decoder.finish()


# -- encoding ----------------------------------------------------------------


def encode_selfies(graph: MolGraph) -> SelfiesStream:
    """Encode a molecular graph; decode_selfies inverts it up to graph
    isomorphism (aromatic rings come back in alternating form).

    Raises NotEncodable for graphs outside the supported set: empty or
    multi-component graphs, elements beyond the core table, isotopes,
    charges beyond one digit, hydrogen counts away from their derived
    defaults, or aromatic systems with no alternating assignment.
    """
    if not graph.atoms:
        raise NotEncodable("empty graph")
    if len(graph.components()) > 1:
        raise NotEncodable("multiple components")
    for atom in graph.atoms:
        if atom.element not in _CORE_ELEMENTS:
            raise NotEncodable(f"element {atom.element} not encodable")
        if atom.isotope is not None:
            raise NotEncodable("isotope labels not encodable")
        if abs(atom.charge) > 9:
            raise NotEncodable("charge magnitude above 9")
        if atom.charge and allowed_valences(atom.element, atom.charge) == (0,):
            raise NotEncodable("charge leaves no bonding capacity")

    orders = _resolve_aromatic(graph)

    sums = [0] * len(graph.atoms)
    for bi, bond in enumerate(graph.bonds):
        value = {SINGLE: 1, DOUBLE: 2, TRIPLE: 3}[orders[bi]]
        sums[bond.a] += value
        sums[bond.b] += value
    for idx, atom in enumerate(graph.atoms):
        allowed = allowed_valences(atom.element, atom.charge)
        target = next((v for v in allowed if v >= sums[idx]), None)
        if target is None:
            raise NotEncodable("bond orders exceed the element's valence")
        if target - sums[idx] != graph.total_h(idx):
            raise NotEncodable("hydrogen count is not at its derived default")

    tokens: list[str] = []
    visited = [False] * len(graph.atoms)
    position: dict[int, int] = {}
    bond_done = [False] * len(graph.bonds)

    def atom_token(idx: int, order: int) -> str:
        atom = graph.atoms[idx]
        charge = ""
        if atom.charge:
            charge = f"{'+' if atom.charge > 0 else '-'}{abs(atom.charge)}"
        return f"[{_ORDER_PREFIX[order]}{atom.element}{charge}]"

    def index_tokens(value: int) -> list[str]:
        if value < 16:
            digits = [value]
        elif value < 256:
            digits = [value // 16, value % 16]
        elif value < 4096:
            digits = [value // 256, (value // 16) % 16, value % 16]
        else:
            raise NotEncodable("structure too large for index encoding")
        return [INDEX_ALPHABET[d] for d in digits]

    def struct_token(kind: str, order: int, value: int) -> list[str]:
        digits = index_tokens(value)
        return [f"[{_ORDER_PREFIX[order]}{kind}{len(digits)}]"] + digits

    def emit(idx: int, parent_order: int) -> list[str]:
        visited[idx] = True
        position[idx] = len(position)
        out = [atom_token(idx, parent_order)]
        # ring closures back to already-derived atoms
        for bi in graph.adjacency()[idx]:
            bond = graph.bonds[bi]
            nbr = bond.other(idx)
            if bond_done[bi] or not visited[nbr]:
                continue
            bond_done[bi] = True
            out.extend(
                struct_token("Ring", orders[bi], position[idx] - position[nbr] - 1)
            )
        subtrees: list[tuple[int, list[str]]] = []
        for bi in sorted(
            graph.adjacency()[idx], key=lambda b: graph.bonds[b].other(idx)
        ):
            bond = graph.bonds[bi]
            nbr = bond.other(idx)
            if bond_done[bi] or visited[nbr]:
                continue
            bond_done[bi] = True
            subtrees.append((orders[bi], emit(nbr, orders[bi])))
        for order, body in subtrees[:-1]:
            out.extend(struct_token("Branch", order, len(body) - 1))
            out.extend(body)
        if subtrees:
            out.extend(subtrees[-1][1])
        return out

    tokens = emit(0, SINGLE)
    return SelfiesStream(tuple(tokens))


def _resolve_aromatic(graph: MolGraph) -> list[int]:
    """Concrete order per bond; aromatic bonds become an alternating
    single/double pattern consistent with derived hydrogen counts."""
    orders = [bond.order for bond in graph.bonds]
    aromatic_bonds = [bi for bi, bond in enumerate(graph.bonds) if bond.order == AROMATIC]
    if not aromatic_bonds:
        return orders
    needs = {
        idx
        for idx in range(len(graph.atoms))
        if graph.effective_bond_sum(idx) != graph.plain_bond_sum(idx)
    }
    candidates = [
        bi
        for bi in aromatic_bonds
        if graph.bonds[bi].a in needs and graph.bonds[bi].b in needs
    ]
    matched = _match(sorted(needs), candidates, graph)
    if matched is None:
        raise NotEncodable("no alternating assignment for the aromatic system")
    for bi in aromatic_bonds:
        orders[bi] = DOUBLE if bi in matched else SINGLE
    return orders


def _match(pending: list[int], candidates: list[int], graph: MolGraph) -> set[int] | None:
    """Backtracking perfect matching over the atoms in pending."""
    if not pending:
        return set()
    first = pending[0]
    rest = pending[1:]
    for bi in candidates:
        bond = graph.bonds[bi]
        if first not in (bond.a, bond.b):
            continue
        other = bond.other(first)
        if other not in rest:
            continue
        sub = _match(
            [i for i in rest if i != other],
            [c for c in candidates if c != bi],
            graph,
        )
        if sub is not None:
            sub.add(bi)
            return sub
    return None
