"""Permutation algebra, finite permutation groups, and discrete group actions.

Conventions used across the package:

* a permutation of degree n is stored by its image array: ``p.images[i] = p(i)``,
  0-based;
* composition applies the right factor first: ``compose(p, q)(i) = p(q(i))``;
* the action on a vector moves values onto permuted slots: ``(p . x)[p(i)] = x[i]``,
  equivalently ``(p . x)[i] = x[p^-1(i)]``;
* the permutation matrix has a 1 at row ``p(j)``, column ``j``, which makes
  ``matrix(compose(p, q)) == matrix(p) @ matrix(q)`` exact.

Group elements are enumerated breadth-first from the generating set, layers
sorted lexicographically by image array, so every construction downstream
(orbit ids, colors, exports) is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DEFAULT_ORDER_CAP = 10_000


class GroupError(ValueError):
    """Invalid permutation, inconsistent action, or non-generating set."""


@dataclass(frozen=True)
class Permutation:
    """A bijection of {0..n-1} in image-array form."""

    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(len(self.images))):
            raise GroupError(f"not a permutation of 0..{len(self.images) - 1}: {self.images!r}")

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def is_identity(self) -> bool:
        return all(v == i for i, v in enumerate(self.images))

    def __repr__(self):
        return f"Permutation({format_cycles(self)!r}, degree={self.degree})"


def perm(images: Iterable[int]) -> Permutation:
    return Permutation(tuple(images))


def identity(n: int) -> Permutation:
    return Permutation(tuple(range(n)))


def compose(p: Permutation, q: Permutation) -> Permutation:
    """Return p after q: result(i) = p(q(i))."""
    if p.degree != q.degree:
        raise GroupError(f"degree mismatch: {p.degree} != {q.degree}")
    return Permutation(tuple(p.images[j] for j in q.images))


def inverse(p: Permutation) -> Permutation:
    inv = [0] * p.degree
    for i, v in enumerate(p.images):
        inv[v] = i
    return Permutation(tuple(inv))


def permutation_matrix(p: Permutation) -> np.ndarray:
    """0/1 matrix with a 1 at (p(j), j)."""
    mat = np.zeros((p.degree, p.degree), dtype=np.int64)
    mat[list(p.images), range(p.degree)] = 1
    return mat


def act_on_vector(p: Permutation, x: np.ndarray) -> np.ndarray:
    """Apply the vector action: result[p(i)] = x[i]."""
    x = np.asarray(x)
    if x.shape[0] != p.degree:
        raise GroupError(f"vector length {x.shape[0]} != degree {p.degree}")
    out = np.empty_like(x)
    out[list(p.images)] = x
    return out


# ---------------------------------------------------------------------------
# cycle notation


def format_cycles(p: Permutation, one_based: bool = False) -> str:
    """Render as a product of disjoint cycles, fixed points omitted: "(0 1 2)(4 5)"."""
    off = 1 if one_based else 0
    seen = [False] * p.degree
    parts = []
    for start in range(p.degree):
        if seen[start] or p.images[start] == start:
            seen[start] = True
            continue
        cyc = [start]
        seen[start] = True
        j = p.images[start]
        while j != start:
            cyc.append(j)
            seen[j] = True
            j = p.images[j]
        parts.append("(" + " ".join(str(c + off) for c in cyc) + ")")
    return "".join(parts) if parts else "()"


def parse_cycles(text: str, degree: int, one_based: bool = False) -> Permutation:
    """Parse cycle notation like "(0 1 2)(4 5)"; "()" or "" is the identity."""
    off = 1 if one_based else 0
    images = list(range(degree))
    touched = set()
    body = text.strip()
    if body in ("", "()"):
        return identity(degree)
    if not body.startswith("(") or not body.endswith(")"):
        raise GroupError(f"cycle notation must be parenthesized: {text!r}")
    for chunk in body[1:-1].split(")("):
        fields = chunk.replace(",", " ").split()
        if not fields:
            continue
        try:
            cyc = [int(f) - off for f in fields]
        except ValueError:
            raise GroupError(f"non-integer entry in cycle {chunk!r}") from None
        for c in cyc:
            if not 0 <= c < degree:
                raise GroupError(f"index {c + off} out of range for degree {degree} in {text!r}")
            if c in touched:
                raise GroupError(f"index {c + off} repeated in {text!r}")
            touched.add(c)
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            images[a] = b
    return Permutation(tuple(images))


# ---------------------------------------------------------------------------
# groups


class PermutationGroup:
    """An explicit element list closed under composition.

    elements[0] is the identity; the rest follow breadth-first layers over the
    generators, each layer sorted by image array, so the element order is a
    deterministic function of the generator list.
    """

    def __init__(self, degree: int, elements: Sequence[Permutation], generator_ids: Sequence[int]):
        self.degree = degree
        self.elements = tuple(elements)
        self.generator_ids = tuple(generator_ids)
        self.order = len(self.elements)
        self._index = {p.images: i for i, p in enumerate(self.elements)}
        if not self.elements or not self.elements[0].is_identity():
            raise GroupError("element 0 must be the identity")
        if len(self._index) != self.order:
            raise GroupError("duplicate elements")

    def index_of(self, p: Permutation) -> int:
        try:
            return self._index[p.images]
        except KeyError:
            raise GroupError(f"{p!r} is not an element of this group") from None

    def mul(self, i: int, j: int) -> int:
        """Index of elements[i] composed with elements[j] (j applied first)."""
        return self.index_of(compose(self.elements[i], self.elements[j]))

    def inv(self, i: int) -> int:
        return self.index_of(inverse(self.elements[i]))

    @property
    def generators(self) -> tuple[Permutation, ...]:
        return tuple(self.elements[i] for i in self.generator_ids)

    def __eq__(self, other):
        return (
            isinstance(other, PermutationGroup)
            and self.degree == other.degree
            and self.elements == other.elements
        )

    def __hash__(self):
        return hash((self.degree, self.elements))

    def __repr__(self):
        return f"PermutationGroup(degree={self.degree}, order={self.order})"


def close_generators(gens: Sequence[Permutation], cap: int = DEFAULT_ORDER_CAP) -> PermutationGroup:
    """Close a generator list under composition, breadth-first.

    Raises GroupError when the closure grows past ``cap`` elements.
    """
    if not gens:
        raise GroupError("need at least one generator")
    if cap <= 0:
        raise GroupError("cap must be positive")
    degree = gens[0].degree
    for g in gens:
        if g.degree != degree:
            raise GroupError(f"degree mismatch among generators: {g.degree} != {degree}")

    ident = identity(degree)
    elements = [ident]
    seen = {ident.images}
    frontier = [ident]
    while frontier:
        layer = []
        for p in frontier:
            for g in gens:
                q = compose(p, g)
                if q.images not in seen:
                    seen.add(q.images)
                    layer.append(q)
        layer.sort(key=lambda t: t.images)
        elements.extend(layer)
        if len(elements) > cap:
            raise GroupError(
                f"order cap exceeded: closure has more than {cap} elements; raise the cap"
            )
        frontier = layer

    index = {p.images: i for i, p in enumerate(elements)}
    gen_ids = []
    for g in gens:
        gid = index[g.images]
        if gid not in gen_ids:
            gen_ids.append(gid)
    return PermutationGroup(degree, elements, gen_ids)


# ---------------------------------------------------------------------------
# named generator families


def cyclic_generators(n: int) -> list[Permutation]:
    """Z_n: a single n-cycle i -> i+1 (mod n)."""
    if n < 1:
        raise GroupError("cyclic: n must be >= 1")
    return [Permutation(tuple((i + 1) % n for i in range(n)))]


def dihedral_generators(n: int) -> list[Permutation]:
    """D_n on n points: the n-cycle plus the reflection i -> -i (mod n)."""
    if n < 1:
        raise GroupError("dihedral: n must be >= 1")
    rot = Permutation(tuple((i + 1) % n for i in range(n)))
    ref = Permutation(tuple((n - i) % n for i in range(n)))
    return [rot, ref]


def symmetric_generators(n: int) -> list[Permutation]:
    """S_n: the adjacent transposition (0 1) plus the n-cycle."""
    if n < 1:
        raise GroupError("symmetric: n must be >= 1")
    if n == 1:
        return [identity(1)]
    swap = list(range(n))
    swap[0], swap[1] = 1, 0
    gens = [Permutation(tuple(swap))]
    if n > 2:
        gens.append(Permutation(tuple((i + 1) % n for i in range(n))))
    return gens


def wreath_generators(d: int, blocks: int) -> list[Permutation]:
    """S_d wr S_blocks acting on d*blocks points (blocks of size d).

    Within-block S_d generators on block 0, plus generators permuting whole
    blocks; the closure has order (d!)^blocks * blocks!.
    """
    if d < 1 or blocks < 1:
        raise GroupError("wreath: d and blocks must be >= 1")
    n = d * blocks
    gens: list[Permutation] = []
    for sg in symmetric_generators(d):
        if sg.is_identity():
            continue
        ext = list(range(n))
        ext[:d] = sg.images
        gens.append(Permutation(tuple(ext)))

    def block_map(bperm: Permutation) -> Permutation:
        imgs = [0] * n
        for b in range(blocks):
            for i in range(d):
                imgs[b * d + i] = bperm(b) * d + i
        return Permutation(tuple(imgs))

    for bg in symmetric_generators(blocks):
        if bg.is_identity():
            continue
        gens.append(block_map(bg))
    return gens or [identity(n)]


def direct_product_generators(*factors: Sequence[Permutation]) -> list[Permutation]:
    """Generators of a direct product acting on the disjoint union of the factors."""
    if not factors:
        raise GroupError("direct_product: need at least one factor")
    degrees = []
    for f in factors:
        if not f:
            raise GroupError("direct_product: empty factor generator list")
        degrees.append(f[0].degree)
    total = sum(degrees)
    gens = []
    offset = 0
    for f, deg in zip(factors, degrees):
        for g in f:
            imgs = list(range(total))
            for i in range(deg):
                imgs[offset + i] = offset + g(i)
            gens.append(Permutation(tuple(imgs)))
        offset += deg
    return gens


def named_group(kind: str, **params) -> list[Permutation]:
    """Dispatch on a family name; see the individual constructors for degrees."""
    if kind == "cyclic":
        return cyclic_generators(params["n"])
    if kind == "dihedral":
        return dihedral_generators(params["n"])
    if kind == "symmetric":
        return symmetric_generators(params["n"])
    if kind == "wreath":
        return wreath_generators(params["d"], params["blocks"])
    if kind == "direct_product":
        return direct_product_generators(*params["factors"])
    raise GroupError(f"unknown group kind {kind!r}")


# ---------------------------------------------------------------------------
# actions


@dataclass(frozen=True)
class OrbitPartition:
    """Orbits of an action: orbit_of[i] is the orbit id of point i."""

    orbit_of: tuple[int, ...]
    representatives: tuple[int, ...]

    @property
    def orbit_count(self) -> int:
        return len(self.representatives)

    def members(self, orbit_id: int) -> list[int]:
        return [i for i, o in enumerate(self.orbit_of) if o == orbit_id]


@dataclass(frozen=True)
class ActionProfile:
    faithful: bool
    transitive: bool
    semi_regular: bool
    regular: bool
    kernel_size: int
    image_order: int


class GroupAction:
    """One permutation of the target set per group element, homomorphically.

    images is indexed identically to group.elements; images[0] is the identity.
    """

    def __init__(self, group: PermutationGroup, target_size: int, images: Sequence[Permutation]):
        self.group = group
        self.target_size = target_size
        self.images = tuple(images)
        if len(self.images) != group.order:
            raise GroupError("need one image per group element")
        for p in self.images:
            if p.degree != target_size:
                raise GroupError(f"image degree {p.degree} != target size {target_size}")
        if not self.images[0].is_identity():
            raise GroupError("identity must act as the identity permutation")

    def __repr__(self):
        return f"GroupAction(|G|={self.group.order}, target_size={self.target_size})"


def build_action(
    group: PermutationGroup, gen_images: Sequence[Permutation], target_size: int
) -> GroupAction:
    """Extend generator images to the whole group by pair closure.

    Walks the Cayley graph from the identity, assigning each element the
    product of its word's generator images; every edge is checked, so any
    element that would receive two distinct images raises "inconsistent
    action" (the assignment is a homomorphism iff no conflict appears).
    """
    gen_ids = group.generator_ids
    if len(gen_images) != len(gen_ids):
        raise GroupError(f"need {len(gen_ids)} generator images, got {len(gen_images)}")
    for m in gen_images:
        if m.degree != target_size:
            raise GroupError(f"generator image degree {m.degree} != target size {target_size}")

    images: list[Permutation | None] = [None] * group.order
    images[0] = identity(target_size)
    queue = [0]
    head = 0
    while head < len(queue):
        i = queue[head]
        head += 1
        for gid, gimg in zip(gen_ids, gen_images):
            k = group.mul(i, gid)
            cand = compose(images[i], gimg)  # type: ignore[arg-type]
            if images[k] is None:
                images[k] = cand
                queue.append(k)
            elif images[k] != cand:
                raise GroupError(
                    "inconsistent action: element "
                    f"{format_cycles(group.elements[k])} receives two distinct images"
                )
    if any(img is None for img in images):
        raise GroupError("generators do not generate the reference group")
    return GroupAction(group, target_size, images)  # type: ignore[arg-type]


def natural_action(group: PermutationGroup) -> GroupAction:
    """Each element acting by itself on {0..degree-1}."""
    return GroupAction(group, group.degree, group.elements)


def regular_action(group: PermutationGroup) -> GroupAction:
    """The group acting on its own element indices by left multiplication."""
    images = []
    for i in range(group.order):
        images.append(Permutation(tuple(group.mul(i, j) for j in range(group.order))))
    return GroupAction(group, group.order, images)


def trivial_action(group: PermutationGroup, target_size: int) -> GroupAction:
    return GroupAction(group, target_size, [identity(target_size)] * group.order)


def orbits(action: GroupAction) -> OrbitPartition:
    """Partition the target set into orbits; representative = smallest index."""
    gen_images = [action.images[i] for i in action.group.generator_ids]
    orbit_of = [-1] * action.target_size
    reps = []
    for start in range(action.target_size):
        if orbit_of[start] >= 0:
            continue
        oid = len(reps)
        reps.append(start)
        stack = [start]
        orbit_of[start] = oid
        while stack:
            x = stack.pop()
            for g in gen_images:
                y = g(x)
                if orbit_of[y] < 0:
                    orbit_of[y] = oid
                    stack.append(y)
    return OrbitPartition(tuple(orbit_of), tuple(reps))


def classify_action(action: GroupAction) -> ActionProfile:
    """Faithfulness, transitivity, and (semi-)regularity of an action."""
    distinct = {p.images for p in action.images}
    kernel_size = sum(1 for p in action.images if p.is_identity())
    image_order = len(distinct)
    transitive = orbits(action).orbit_count == 1
    # a non-identity image fixing any point breaks semi-regularity
    semi_regular = True
    for imgs in distinct:
        if all(v == i for i, v in enumerate(imgs)):
            continue
        if any(v == i for i, v in enumerate(imgs)):
            semi_regular = False
            break
    return ActionProfile(
        faithful=kernel_size == 1,
        transitive=transitive,
        semi_regular=semi_regular,
        regular=transitive and semi_regular,
        kernel_size=kernel_size,
        image_order=image_order,
    )


def faithful_image(action: GroupAction) -> tuple[PermutationGroup, ActionProfile]:
    """The deduplicated image group (the quotient by the kernel) plus the profile."""
    gen_imgs = [action.images[i] for i in action.group.generator_ids]
    seen = set()
    unique = []
    for g in gen_imgs:
        if g.images not in seen:
            seen.add(g.images)
            unique.append(g)
    image_group = close_generators(unique, cap=max(DEFAULT_ORDER_CAP, action.group.order))
    profile = classify_action(action)
    if image_group.order * profile.kernel_size != action.group.order:
        raise GroupError("image order times kernel size must equal the group order")
    return image_group, profile


class JointAction:
    """Paired input/output actions of one reference group (a sub-direct product)."""

    def __init__(self, n_action: GroupAction, m_action: GroupAction):
        if n_action.group != m_action.group:
            raise GroupError("reference-group mismatch between the two actions")
        self.group = n_action.group
        self.n_action = n_action
        self.m_action = m_action
        seen = set()
        pairs = []
        for gn, gm in zip(n_action.images, m_action.images):
            key = (gn.images, gm.images)
            if key not in seen:
                seen.add(key)
                pairs.append((gn, gm))
        self.joint_elements = tuple(pairs)
        self.joint_order = len(pairs)

    @property
    def n_size(self) -> int:
        return self.n_action.target_size

    @property
    def m_size(self) -> int:
        return self.m_action.target_size

    def pair_set(self) -> set[tuple[tuple[int, ...], tuple[int, ...]]]:
        return {(gn.images, gm.images) for gn, gm in self.joint_elements}

    def __repr__(self):
        return (
            f"JointAction(|G|={self.group.order}, n={self.n_size}, "
            f"m={self.m_size}, joint_order={self.joint_order})"
        )


def joint_action(n_action: GroupAction, m_action: GroupAction) -> JointAction:
    return JointAction(n_action, m_action)


def symmetrize_genset(group: PermutationGroup, element_ids: Iterable[int]) -> tuple[int, ...]:
    """Close a set of element ids under inverse and verify it generates the group."""
    ids = set(element_ids)
    for i in ids:
        if not 0 <= i < group.order:
            raise GroupError(f"element id {i} out of range for a group of order {group.order}")
    ids |= {group.inv(i) for i in set(ids)}
    sub = close_generators([group.elements[i] for i in sorted(ids)], cap=group.order)
    if sub.order != group.order:
        raise GroupError(
            f"A does not generate G: closure of A union A^-1 has order {sub.order} "
            f"< {group.order}"
        )
    return tuple(sorted(ids))
