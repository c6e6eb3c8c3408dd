"""Chemical sanity checks and whole-molecule descriptors."""

from __future__ import annotations

from statistics import median

from .elements import allowed_valences, atomic_weight
from .model import MolGraph


def validity(graph: MolGraph) -> bool:
    """True when every atom's total valence is allowed for its element
    and charge. Elements outside the valence table are unconstrained."""
    for idx, atom in enumerate(graph.atoms):
        allowed = allowed_valences(atom.element, atom.charge)
        if allowed is None:
            continue
        if graph.total_valence(idx) not in allowed:
            return False
    return True


def descriptors(graph: MolGraph) -> dict:
    """Molecular weight, heavy atom count, and ring counts.

    Hydrogen mass covers both explicit and derived hydrogens.
    """
    weight = 0.0
    heavy = 0
    for idx, atom in enumerate(graph.atoms):
        weight += atomic_weight(atom.element, atom.isotope)
        weight += graph.total_h(idx) * atomic_weight("H")
        if atom.element != "H":
            heavy += 1
    rings = graph.rings()
    aromatic_rings = sum(
        1 for cyc in rings if all(graph.atoms[i].aromatic for i in cyc)
    )
    return {
        "mol_weight": weight,
        "heavy_atoms": heavy,
        "rings": len(rings),
        "aromatic_rings": aromatic_rings,
    }


def murcko_scaffold(graph: MolGraph) -> MolGraph:
    """Ring systems plus connecting linkers.

    Non-ring atoms of degree <= 1 are deleted repeatedly until none
    remain; an acyclic molecule reduces to the empty graph.
    """
    keep = list(range(len(graph.atoms)))
    current = graph
    while True:
        ring = current.ring_atoms()
        drop = [
            i
            for i in range(len(current.atoms))
            if i not in ring and current.degree(i) <= 1
        ]
        if not drop:
            return current
        remaining = [i for i in range(len(current.atoms)) if i not in set(drop)]
        current = current.subgraph(remaining)
        keep = [keep[i] for i in remaining]


def summarize_descriptors(values: list[float]) -> dict:
    """min/median/max summary used by dataset profiling."""
    if not values:
        return {"min": None, "median": None, "max": None}
    return {"min": min(values), "median": median(values), "max": max(values)}
