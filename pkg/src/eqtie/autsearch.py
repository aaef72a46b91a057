"""Exact enumeration of the automorphism group of a sharing structure.

An automorphism is a pair of permutations (pi_N, pi_M), one per node part,
preserving the color set of every cell. Multi-edges are handled by treating
the full color set of a cell (its merged label) as the atomic edge label.

The search maps N-part nodes one at a time, in increasing refinement-class
size, keeping a candidate set per M-part node; each N assignment filters the
M candidates by cell-label consistency. Once pi_N is complete, the valid
pi_M are exactly the bijections between equal-column groups of the label
matrix, so they can be counted as a product of factorials without being
materialized. That keeps exact order counting cheap past the element cap.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

from . import designs, permcore
from .designs import SharingStructure
from .permcore import JointAction, Permutation

DEFAULT_NODE_BUDGET = 24
DEFAULT_ELEMENT_CAP = 10_000
DEFAULT_SEARCH_CAP = 1_000_000


class AutSearchError(ValueError):
    """Structure too large for the configured budgets, or broken preconditions."""


@dataclass(frozen=True)
class ColorProfileTable:
    """Stable node classes after iterated signature refinement, per part."""

    n_classes: tuple[int, ...]
    m_classes: tuple[int, ...]
    rounds: int


@dataclass(frozen=True)
class AutomorphismResult:
    order: int
    elements: Optional[tuple[tuple[Permutation, Permutation], ...]]
    generators: Optional[tuple[tuple[Permutation, Permutation], ...]]
    verdict: Optional[str] = None  # equal | proper_supergroup | incomparable
    joint_order: Optional[int] = None

    def pair_set(self) -> set[tuple[tuple[int, ...], tuple[int, ...]]]:
        if self.elements is None:
            raise AutSearchError("elements were not materialized (order above cap)")
        return {(pn.images, pm.images) for pn, pm in self.elements}


def _label_grid(s: SharingStructure) -> list[list[int]]:
    cm = designs.merge_colors(s)
    return [[int(cm.grid[m, n]) for n in range(s.n_size)] for m in range(s.m_size)]


def color_refine(s: SharingStructure) -> ColorProfileTable:
    """Refine node classes by multisets of (cell label, opposite class) to a fixed point."""
    grid = _label_grid(s)
    n_size, m_size = s.n_size, s.m_size
    nc = [0] * n_size
    mc = [0] * m_size
    rounds = 0
    while True:
        n_sigs = [
            (nc[i], tuple(sorted((grid[j][i], mc[j]) for j in range(m_size))))
            for i in range(n_size)
        ]
        m_sigs = [
            (mc[j], tuple(sorted((grid[j][i], nc[i]) for i in range(n_size))))
            for j in range(m_size)
        ]
        n_ids = {sig: k for k, sig in enumerate(sorted(set(n_sigs)))}
        m_ids = {sig: k for k, sig in enumerate(sorted(set(m_sigs)))}
        new_nc = [n_ids[sig] for sig in n_sigs]
        new_mc = [m_ids[sig] for sig in m_sigs]
        rounds += 1
        # refinement only ever splits classes, so stable counts mean a fixed point
        if len(set(new_nc)) == len(set(nc)) and len(set(new_mc)) == len(set(mc)):
            return ColorProfileTable(tuple(new_nc), tuple(new_mc), rounds)
        nc, mc = new_nc, new_mc


def _preserves_structure(s: SharingStructure, pn: Permutation, pm: Permutation) -> bool:
    """Direct setwise check of relation preservation (independent of the grid)."""
    for rel in s.relations:
        if frozenset((pn(n), pm(m)) for n, m in rel.edges) != rel.edges:
            return False
    return True


def _greedy_generators(elements: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """A generating subset of a permutation group given as a full element list."""
    universe = set(elements)
    degree = len(elements[0])
    ident = tuple(range(degree))
    closed = {ident}
    gens: list[tuple[int, ...]] = []
    for g in sorted(universe):
        if g in closed:
            continue
        gens.append(g)
        closed.add(g)
        # re-close under the enlarged generator set
        queue = list(closed)
        while queue:
            p = queue.pop()
            for h in gens:
                q = tuple(p[v] for v in h)
                if q not in closed:
                    closed.add(q)
                    queue.append(q)
        if len(closed) == len(universe):
            break
    return gens


def enumerate_automorphisms(
    s: SharingStructure,
    reference: Optional[JointAction] = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
    element_cap: int = DEFAULT_ELEMENT_CAP,
    search_cap: int = DEFAULT_SEARCH_CAP,
) -> AutomorphismResult:
    """Enumerate aut(structure) exactly by backtracking.

    Returns the exact order always; the full element list when the order is at
    most ``element_cap``, otherwise a generating set. With a ``reference``
    joint action the verdict states whether aut equals it, strictly contains
    it, or the reference does not even preserve the colors (incomparable).
    """
    n_size, m_size = s.n_size, s.m_size
    if n_size + m_size > node_budget:
        raise AutSearchError(
            f"node budget exceeded: {n_size} + {m_size} > {node_budget}; raise node_budget"
        )
    grid = _label_grid(s)
    table = color_refine(s)

    class_size_n = {c: table.n_classes.count(c) for c in set(table.n_classes)}
    order_n = sorted(range(n_size), key=lambda i: (class_size_n[table.n_classes[i]], i))
    n_candidates = {
        i: [j for j in range(n_size) if table.n_classes[j] == table.n_classes[i]]
        for i in range(n_size)
    }
    m_class_members = {
        j: frozenset(k for k in range(m_size) if table.m_classes[k] == table.m_classes[j])
        for j in range(m_size)
    }

    total = 0
    completed_pi_n = 0
    collecting = True
    elements: list[tuple[Permutation, Permutation]] = []
    pi_n_images: list[tuple[int, ...]] = []
    first_lift: dict[tuple[int, ...], tuple[int, ...]] = {}
    kernel_groups: Optional[list[list[int]]] = None

    pi_n = [-1] * n_size
    used_n = [False] * n_size

    def complete(cand_m: list[frozenset[int]]):
        nonlocal total, collecting, completed_pi_n, kernel_groups
        completed_pi_n += 1
        if completed_pi_n > search_cap:
            raise AutSearchError(f"search cap exceeded: more than {search_cap} N-side maps")
        # group source M nodes by their candidate target set; a completion is a
        # bijection inside each group, so they must pair off exactly
        groups: dict[frozenset[int], list[int]] = {}
        for mm in range(m_size):
            groups.setdefault(cand_m[mm], []).append(mm)
        covered: set[int] = set()
        for targets, sources in groups.items():
            if len(targets) != len(sources):
                return
            covered |= targets
        if len(covered) != m_size:
            return

        count_here = math.prod(math.factorial(len(g)) for g in groups.values())
        pn_tuple = tuple(pi_n)
        pi_n_images.append(pn_tuple)
        sorted_groups = sorted(groups.items(), key=lambda kv: kv[1])
        lift = [0] * m_size
        for targets, sources in sorted_groups:
            for src, dst in zip(sources, sorted(targets)):
                lift[src] = dst
        first_lift.setdefault(pn_tuple, tuple(lift))
        if pn_tuple == tuple(range(n_size)):
            kernel_groups = [sorted(g) for _, g in sorted_groups]

        if collecting and total + count_here > element_cap:
            collecting = False
            elements.clear()
        if collecting:
            pn = Permutation(pn_tuple)
            source_lists = [sources for _, sources in sorted_groups]
            target_lists = [sorted(targets) for targets, _ in sorted_groups]
            for combo in itertools.product(
                *(itertools.permutations(t) for t in target_lists)
            ):
                pm = [0] * m_size
                for sources, images in zip(source_lists, combo):
                    for src, dst in zip(sources, images):
                        pm[src] = dst
                elements.append((pn, Permutation(tuple(pm))))
        total += count_here

    def recurse(level: int, cand_m: list[frozenset[int]]):
        if level == n_size:
            complete(cand_m)
            return
        i = order_n[level]
        row_i = [grid[j][i] for j in range(m_size)]
        for j in n_candidates[i]:
            if used_n[j]:
                continue
            new_cand = []
            ok = True
            for mm in range(m_size):
                filtered = frozenset(m2 for m2 in cand_m[mm] if grid[m2][j] == row_i[mm])
                if not filtered:
                    ok = False
                    break
                new_cand.append(filtered)
            if not ok:
                continue
            pi_n[i] = j
            used_n[j] = True
            recurse(level + 1, new_cand)
            pi_n[i] = -1
            used_n[j] = False

    recurse(0, [m_class_members[j] for j in range(m_size)])

    if collecting:
        elements.sort(key=lambda pair: (pair[0].images, pair[1].images))
        for pn, pm in elements:
            if not _preserves_structure(s, pn, pm):
                raise AutSearchError("internal error: emitted pair fails the setwise check")
        result_elements: Optional[tuple] = tuple(elements)
        result_generators = None
    else:
        gens: list[tuple[Permutation, Permutation]] = []
        ident_n = permcore.identity(n_size)
        assert kernel_groups is not None
        for group_nodes in kernel_groups:
            if len(group_nodes) < 2:
                continue
            swap = list(range(m_size))
            swap[group_nodes[0]], swap[group_nodes[1]] = group_nodes[1], group_nodes[0]
            gens.append((ident_n, Permutation(tuple(swap))))
            if len(group_nodes) > 2:
                cyc = list(range(m_size))
                for a, b in zip(group_nodes, group_nodes[1:] + group_nodes[:1]):
                    cyc[a] = b
                gens.append((ident_n, Permutation(tuple(cyc))))
        for pn_t in _greedy_generators(pi_n_images):
            gens.append((Permutation(pn_t), Permutation(first_lift[pn_t])))
        for pn, pm in gens:
            if not _preserves_structure(s, pn, pm):
                raise AutSearchError("internal error: emitted generator fails the setwise check")
        result_elements = None
        result_generators = tuple(gens)

    verdict = None
    joint_order = None
    if reference is not None:
        joint_order = reference.joint_order
        preserved = all(
            _preserves_structure(s, gn, gm) for gn, gm in reference.joint_elements
        )
        if not preserved:
            verdict = "incomparable"
        elif total == joint_order:
            verdict = "equal"
        else:
            verdict = "proper_supergroup"

    return AutomorphismResult(
        order=total,
        elements=result_elements,
        generators=result_generators,
        verdict=verdict,
        joint_order=joint_order,
    )


@dataclass(frozen=True)
class Certification:
    verdict: str  # "unique" | "supergroup"
    aut_order: int
    joint_order: int
    witness: Optional[tuple[Permutation, Permutation]]


def certify_unique(
    s: SharingStructure,
    joint: JointAction,
    node_budget: int = DEFAULT_NODE_BUDGET,
    element_cap: int = DEFAULT_ELEMENT_CAP,
    search_cap: int = DEFAULT_SEARCH_CAP,
) -> Certification:
    """Certify unique equivariance: aut(structure) equals the joint group.

    Raises when the joint elements do not preserve the colors, since every
    design in this package must embed its joint group (a broken upstream
    invariant, not a verdict).
    """
    result = enumerate_automorphisms(
        s, reference=joint, node_budget=node_budget,
        element_cap=element_cap, search_cap=search_cap,
    )
    if result.verdict == "incomparable":
        raise AutSearchError(
            "joint action does not preserve the structure colors; the design is broken"
        )
    if result.verdict == "equal":
        return Certification("unique", result.order, joint.joint_order, None)

    ref_pairs = joint.pair_set()
    witness = None
    candidates = result.elements if result.elements is not None else result.generators
    for pn, pm in candidates or ():
        if (pn.images, pm.images) not in ref_pairs:
            witness = (pn, pm)
            break
    return Certification("supergroup", result.order, joint.joint_order, witness)
