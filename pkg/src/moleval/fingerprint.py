"""Binary molecular fingerprints and Tanimoto similarity.

Two families: circular neighborhoods grown around each atom, and simple
bond paths encoded direction-canonically. Both hash structural features
with 64-bit FNV-1a and fold them into a fixed-width bitset.
"""

from __future__ import annotations

from dataclasses import dataclass

from .molgraph.model import MolGraph

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


class WidthMismatch(ValueError):
    pass


class KindMismatch(ValueError):
    pass


def _fnv1a(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


@dataclass(frozen=True)
class Fingerprint:
    bits: int
    width: int
    kind: str

    def __post_init__(self):
        if self.width < 64 or self.width & (self.width - 1):
            raise ValueError("width must be a power of two, at least 64")

    def popcount(self) -> int:
        return self.bits.bit_count()


def _initial_codes(graph: MolGraph) -> list[int]:
    codes = []
    for idx, atom in enumerate(graph.atoms):
        payload = "|".join(
            (
                atom.element,
                str(graph.degree(idx)),
                str(atom.charge),
                str(graph.implicit_h(idx)),
                str(int(graph.in_ring(idx))),
                str(int(atom.aromatic)),
            )
        )
        codes.append(_fnv1a(payload.encode()))
    return codes


def morgan_features(graph: MolGraph, radius: int) -> set[int]:
    """All neighborhood codes for radii 0..radius."""
    codes = _initial_codes(graph)
    features = set(codes)
    for _ in range(radius):
        nxt = []
        for idx in range(len(graph.atoms)):
            env = []
            for bi in graph.adjacency()[idx]:
                bond = graph.bonds[bi]
                env.append((bond.order, codes[bond.other(idx)]))
            env.sort()
            payload = f"{codes[idx]:016x}" + "".join(
                f"|{order}:{code:016x}" for order, code in env
            )
            nxt.append(_fnv1a(payload.encode()))
        codes = nxt
        features.update(codes)
    return features


def path_features(graph: MolGraph, max_len: int) -> set[int]:
    """One feature per simple bond path of 1..max_len bonds; each path is
    encoded in its lexicographically smaller traversal direction."""
    atom_codes = _initial_codes(graph)
    encodings: set[str] = set()

    def walk(path_atoms: list[int], path_bonds: list[int]):
        if path_bonds:
            forward = _path_text(path_atoms, path_bonds)
            backward = _path_text(path_atoms[::-1], path_bonds[::-1])
            encodings.add(min(forward, backward))
        if len(path_bonds) == max_len:
            return
        last = path_atoms[-1]
        for bi in graph.adjacency()[last]:
            nbr = graph.bonds[bi].other(last)
            if nbr in path_atoms:
                continue
            walk(path_atoms + [nbr], path_bonds + [bi])

    def _path_text(atoms_seq: list[int], bonds_seq: list[int]) -> str:
        parts = [f"{atom_codes[atoms_seq[0]]:016x}"]
        for k, bi in enumerate(bonds_seq):
            parts.append(str(graph.bonds[bi].order))
            parts.append(f"{atom_codes[atoms_seq[k + 1]]:016x}")
        return "-".join(parts)

    for start in range(len(graph.atoms)):
        walk([start], [])
    return {_fnv1a(text.encode()) for text in encodings}


def _fold(features: set[int], width: int, kind: str) -> Fingerprint:
    bits = 0
    for feature in features:
        bits |= 1 << (feature % width)
    return Fingerprint(bits=bits, width=width, kind=kind)


def morgan_fp(graph: MolGraph, radius: int = 2, width: int = 2048) -> Fingerprint:
    if not 0 <= radius <= 6:
        raise ValueError("radius must be in [0, 6]")
    return _fold(morgan_features(graph, radius), width, f"morgan:{radius}")


def path_fp(graph: MolGraph, max_len: int = 7, width: int = 2048) -> Fingerprint:
    if not 1 <= max_len <= 7:
        raise ValueError("max_len must be in [1, 7]")
    return _fold(path_features(graph, max_len), width, f"path:{max_len}")


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    if a.width != b.width:
        raise WidthMismatch(f"widths differ: {a.width} vs {b.width}")
    if a.kind != b.kind:
        raise KindMismatch(f"kinds differ: {a.kind} vs {b.kind}")
    union = (a.bits | b.bits).bit_count()
    if union == 0:
        return 1.0
    return (a.bits & b.bits).bit_count() / union
