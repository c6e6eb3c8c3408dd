"""SMILES reader covering the organic subset, brackets, rings and branches.

Every input either yields a MolGraph or raises a SmilesError carrying the
byte offset of the offending character; no other exception escapes.
"""

from __future__ import annotations

import re

from .elements import AROMATIC_SUBSET, ORGANIC_SUBSET
from .model import AROMATIC, DOUBLE, SINGLE, TRIPLE, Atom, Bond, MolGraph


class SmilesError(ValueError):
    """Base parse error; offset is the byte position in the input."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class EmptyInput(SmilesError):
    pass


class UnbalancedParenthesis(SmilesError):
    pass


class UnclosedRingBond(SmilesError):
    pass


class UnknownElement(SmilesError):
    pass


class BadBracketAtom(SmilesError):
    pass


class DanglingBond(SmilesError):
    """Bond symbol with no atom to attach to."""


class BadRingClosure(SmilesError):
    """Ring bond reopened on the same atom or with conflicting orders."""


class AromaticityError(SmilesError):
    """Aromatic atom that ends up outside any ring."""


_BRACKET = re.compile(
    r"\[(?P<isotope>\d+)?(?P<symbol>[A-Z][a-z]?|[bcnops])"
    r"(?P<chiral>@{1,2})?"
    r"(?P<hcount>H\d?)?"
    r"(?P<charge>\+{1,3}|-{1,3}|\+\d|-\d)?\]"
)

_BOND_ORDERS = {"-": SINGLE, "=": DOUBLE, "#": TRIPLE, ":": AROMATIC}

_TWO_LETTER = {"Cl", "Br"}


def parse_smiles(text: str) -> MolGraph:
    """Parse a SMILES string into a MolGraph.

    Stereo markers (@, @@, /, \\) are recorded as annotations and play no
    further role. Raises a SmilesError subclass on malformed input.
    """
    if not isinstance(text, str):
        raise EmptyInput("input must be a string", 0)
    if text == "" or text.strip() == "":
        raise EmptyInput("empty SMILES", 0)

    atoms: list[Atom] = []
    atom_pos: list[int] = []
    bonds: list[Bond] = []
    prev: int | None = None  # atom awaiting the next bond
    pending_order: int | None = None  # explicit bond symbol seen
    pending_stereo: str | None = None
    pending_pos = 0
    # open ring closures: number -> (atom, explicit order or None, stereo, offset)
    open_rings: dict[int, tuple[int, int | None, str | None, int]] = {}
    stack: list[tuple[int | None, int]] = []  # (prev, open paren offset)

    i = 0
    n = len(text)

    def add_atom(atom: Atom, pos: int) -> None:
        nonlocal prev, pending_order, pending_stereo
        atoms.append(atom)
        atom_pos.append(pos)
        idx = len(atoms) - 1
        if prev is not None:
            order = pending_order
            if order is None:
                order = (
                    AROMATIC
                    if atoms[prev].aromatic and atom.aromatic
                    else SINGLE
                )
            bonds.append(Bond(prev, idx, order, pending_stereo))
        prev = idx
        pending_order = None
        pending_stereo = None

    def close_ring(number: int, pos: int) -> None:
        nonlocal pending_order, pending_stereo
        if prev is None:
            raise BadRingClosure("ring bond before any atom", pos)
        if number in open_rings:
            other, other_order, other_stereo, _ = open_rings.pop(number)
            if other == prev:
                raise BadRingClosure("ring bond to the same atom", pos)
            if any(
                (b.a, b.b) in ((other, prev), (prev, other)) for b in bonds
            ):
                raise BadRingClosure("duplicate bond between atoms", pos)
            order = pending_order
            if order is not None and other_order is not None and order != other_order:
                raise BadRingClosure("conflicting ring bond orders", pos)
            if order is None:
                order = other_order
            if order is None:
                order = (
                    AROMATIC
                    if atoms[other].aromatic and atoms[prev].aromatic
                    else SINGLE
                )
            bonds.append(Bond(other, prev, order, pending_stereo or other_stereo))
        else:
            open_rings[number] = (prev, pending_order, pending_stereo, pos)
        pending_order = None
        pending_stereo = None

    while i < n:
        ch = text[i]
        if ch == "[":
            m = _BRACKET.match(text, i)
            if not m:
                raise BadBracketAtom("malformed bracket atom", i)
            symbol = m.group("symbol")
            aromatic = symbol[0].islower()
            element = symbol if not aromatic else symbol.upper()
            hcount = m.group("hcount")
            explicit_h = 0
            if hcount:
                explicit_h = int(hcount[1:]) if len(hcount) > 1 else 1
            charge_text = m.group("charge") or ""
            if charge_text in ("", None):
                charge = 0
            elif charge_text[-1].isdigit():
                charge = int(charge_text[1:]) * (1 if charge_text[0] == "+" else -1)
            else:
                charge = len(charge_text) * (1 if charge_text[0] == "+" else -1)
            isotope = m.group("isotope")
            add_atom(
                Atom(
                    element=element,
                    charge=charge,
                    isotope=int(isotope) if isotope else None,
                    aromatic=aromatic,
                    explicit_h=explicit_h,
                    chirality=m.group("chiral"),
                ),
                i,
            )
            i = m.end()
        elif ch.isalpha():
            symbol = None
            if text[i : i + 2] in _TWO_LETTER:
                symbol = text[i : i + 2]
            elif ch.upper() in ORGANIC_SUBSET and (ch.isupper() or ch in AROMATIC_SUBSET):
                symbol = ch
            if symbol is None:
                raise UnknownElement(f"unknown element {ch!r}", i)
            aromatic = symbol.islower()
            add_atom(
                Atom(element=symbol.upper() if aromatic else symbol, aromatic=aromatic),
                i,
            )
            i += len(symbol)
        elif ch in _BOND_ORDERS:
            if prev is None:
                raise DanglingBond("bond symbol before any atom", i)
            pending_order = _BOND_ORDERS[ch]
            pending_pos = i
            i += 1
        elif ch in "/\\":
            if prev is None:
                raise DanglingBond("bond symbol before any atom", i)
            pending_order = SINGLE
            pending_stereo = ch
            pending_pos = i
            i += 1
        elif ch.isdigit():
            close_ring(int(ch), i)
            i += 1
        elif ch == "%":
            seg = text[i + 1 : i + 3]
            if len(seg) < 2 or not seg.isdigit():
                raise BadRingClosure("% ring closure needs two digits", i)
            close_ring(int(seg), i)
            i += 3
        elif ch == "(":
            if prev is None:
                raise UnbalancedParenthesis("branch with no preceding atom", i)
            if pending_order is not None:
                raise DanglingBond("bond symbol before branch open", pending_pos)
            stack.append((prev, i))
            i += 1
        elif ch == ")":
            if not stack:
                raise UnbalancedParenthesis("unmatched closing parenthesis", i)
            if pending_order is not None:
                raise DanglingBond("dangling bond at branch close", pending_pos)
            prev, _ = stack.pop()
            i += 1
        elif ch == ".":
            if pending_order is not None:
                raise DanglingBond("bond symbol before dot", pending_pos)
            prev = None
            i += 1
        elif ch.isspace():
            # trailing whitespace terminates the molecule; embedded
            # whitespace is treated the same way as end of input
            if text[i:].strip():
                raise UnknownElement("whitespace inside SMILES", i)
            break
        else:
            raise UnknownElement(f"unexpected character {ch!r}", i)

    if stack:
        raise UnbalancedParenthesis("unclosed branch", stack[-1][1])
    if open_rings:
        number, (_, _, _, pos) = min(open_rings.items(), key=lambda kv: kv[1][3])
        raise UnclosedRingBond(f"ring bond {number} never closed", pos)
    if pending_order is not None:
        raise DanglingBond("trailing bond symbol", pending_pos)
    if not atoms:
        raise EmptyInput("no atoms in input", 0)

    graph = MolGraph(atoms, bonds)
    ring_members = graph.ring_atoms()
    for idx, atom in enumerate(atoms):
        if atom.aromatic and idx not in ring_members:
            raise AromaticityError("aromatic atom outside any ring", atom_pos[idx])
    return graph
