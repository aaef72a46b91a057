"""Tied neural layers: materialize weights, evaluate, and verify equivariance.

Verification runs two routes. The float route evaluates the layer on random
integer-valued inputs and compares output-side and input-side permutation to a
tolerance. The exact route is the authority: it materializes the weight matrix
with the first C primes as parameters (pairwise distinct, exact in int64) and
checks the commutation P_gM @ W == W @ P_gN elementwise for every joint
element. Permuting rows/columns replaces the matrix products, so the check is
pure integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import designs, permcore
from .designs import ColorMatrix, Relation, SharingStructure
from .permcore import JointAction, Permutation

DEFAULT_TOLERANCE = 1e-9
DEFAULT_TRIALS = 8


class LayerError(ValueError):
    """Size mismatch or invalid layer configuration."""


@dataclass(frozen=True)
class Nonlinearity:
    """Strictly monotonic elementwise map: identity, or leaky with slope in (0, 1)."""

    kind: str
    slope: float = 1.0

    def __post_init__(self):
        if self.kind == "identity":
            return
        if self.kind == "leaky":
            if not 0.0 < self.slope < 1.0:
                raise LayerError(f"leaky slope must be in (0, 1), got {self.slope}")
            return
        raise LayerError(f"unknown nonlinearity {self.kind!r}")

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "identity":
            return np.asarray(x, dtype=float)
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, x, self.slope * x)


IDENTITY = Nonlinearity("identity")


def leaky(slope: float = 0.5) -> Nonlinearity:
    return Nonlinearity("leaky", slope)


def first_primes(count: int) -> np.ndarray:
    """The first ``count`` primes, used as certification parameters."""
    primes: list[int] = []
    candidate = 2
    while len(primes) < count:
        if all(candidate % p for p in primes):
            primes.append(candidate)
        candidate += 1
    return np.array(primes, dtype=np.int64)


def materialize(cm: ColorMatrix, theta) -> np.ndarray:
    """W[m, n] = sum of theta over the cell's base colors; empty cells are 0."""
    theta = np.asarray(theta)
    if theta.shape != (cm.base_color_count,):
        raise LayerError(
            f"theta length {theta.shape} does not match base color count {cm.base_color_count}"
        )
    sums = np.zeros(cm.merged_color_count + 1, dtype=theta.dtype)
    for mid, base in cm.merged_to_base.items():
        sums[mid] = theta[[c - 1 for c in base]].sum()
    return sums[cm.grid]


class TiedLayer:
    """A layer y = sigma(W x) with W generated from theta by the color matrix."""

    def __init__(self, color_matrix: ColorMatrix, theta, nonlinearity: Nonlinearity = IDENTITY):
        self.color_matrix = color_matrix
        self.theta = np.asarray(theta)
        self.nonlinearity = nonlinearity
        if self.theta.shape != (color_matrix.base_color_count,):
            raise LayerError(
                f"theta length {self.theta.shape} does not match base color count "
                f"{color_matrix.base_color_count}"
            )

    @property
    def n_size(self) -> int:
        return self.color_matrix.n_size

    @property
    def m_size(self) -> int:
        return self.color_matrix.m_size

    def weights(self) -> np.ndarray:
        return materialize(self.color_matrix, self.theta)

    def require_distinct_theta(self):
        if len(set(self.theta.tolist())) != len(self.theta):
            raise LayerError("theta entries must be pairwise distinct for uniqueness claims")


def tied_layer_from_structure(
    s: SharingStructure, theta=None, nonlinearity: Nonlinearity = IDENTITY
) -> TiedLayer:
    """Merge a structure and wrap it; theta defaults to the first C primes."""
    cm = designs.merge_colors(s)
    if theta is None:
        theta = first_primes(cm.base_color_count)
    return TiedLayer(cm, theta, nonlinearity)


def forward(layer: TiedLayer, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (layer.n_size,):
        raise LayerError(f"input length {x.shape} != n_size {layer.n_size}")
    return layer.nonlinearity.apply(layer.weights().astype(float) @ x)


@dataclass(frozen=True)
class EquivarianceReport:
    tested_elements: int
    trials: int
    max_residual: float
    exact_pass: bool
    tolerance: float
    seed: int
    passed: bool


def matrix_commutes(w: np.ndarray, gn: Permutation, gm: Permutation) -> bool:
    """Exact check of P_gm @ W == W @ P_gn via row/column permutation."""
    inv_m = permcore.inverse(gm)
    lhs = w[list(inv_m.images), :]  # row i of P_gm @ W is row gm^-1(i) of W
    rhs = w[:, list(gn.images)]  # column j of W @ P_gn is column gn(j) of W
    return bool(np.array_equal(lhs, rhs))


def check_equivariance(
    layer: TiedLayer,
    joint: JointAction,
    trials: int = DEFAULT_TRIALS,
    tolerance: float = DEFAULT_TOLERANCE,
    seed: int = 0,
) -> EquivarianceReport:
    """Replay g^M . sigma(W x) == sigma(W . g^N x) for every joint element.

    Failures are reported in the verdict, never raised.
    """
    if layer.n_size != joint.n_size or layer.m_size != joint.m_size:
        raise LayerError(
            f"layer is {layer.m_size} x {layer.n_size} but the joint action targets "
            f"{joint.m_size} x {joint.n_size}"
        )
    w_exact = materialize(layer.color_matrix, first_primes(layer.color_matrix.base_color_count))
    exact_pass = all(matrix_commutes(w_exact, gn, gm) for gn, gm in joint.joint_elements)

    w = layer.weights().astype(float)
    rng = np.random.default_rng(seed)
    max_residual = 0.0
    for gn, gm in joint.joint_elements:
        for _ in range(trials):
            x = rng.integers(-9, 10, size=layer.n_size).astype(float)
            lhs = permcore.act_on_vector(gm, layer.nonlinearity.apply(w @ x))
            rhs = layer.nonlinearity.apply(w @ permcore.act_on_vector(gn, x))
            max_residual = max(max_residual, float(np.max(np.abs(lhs - rhs))))
    return EquivarianceReport(
        tested_elements=joint.joint_order,
        trials=trials,
        max_residual=max_residual,
        exact_pass=exact_pass,
        tolerance=tolerance,
        seed=seed,
        passed=exact_pass and max_residual <= tolerance,
    )


def check_subgroup_monotonicity(
    layer: TiedLayer, joint: JointAction, sub_joint: JointAction, **kwargs
) -> bool:
    """Verify that passing on the full joint group implies passing on a subgroup."""
    if not sub_joint.pair_set() <= joint.pair_set():
        raise LayerError("sub_joint elements are not a subset of the joint elements")
    full = check_equivariance(layer, joint, **kwargs)
    sub = check_equivariance(layer, sub_joint, **kwargs)
    return (not full.passed) or sub.passed


def compose_layers(
    first: TiedLayer,
    second: TiedLayer,
    joint_nm: JointAction,
    joint_mo: JointAction,
    trials: int = DEFAULT_TRIALS,
    tolerance: float = DEFAULT_TOLERANCE,
    seed: int = 0,
) -> EquivarianceReport:
    """Check g^O . phi2(phi1(x)) == phi2(phi1(g^N x)) over the shared reference group.

    The two joints must share the reference group and the middle action.
    """
    if first.m_size != second.n_size:
        raise LayerError(
            f"middle size mismatch: first layer emits {first.m_size}, second takes {second.n_size}"
        )
    if joint_nm.group != joint_mo.group:
        raise LayerError("middle-action mismatch: joints use different reference groups")
    if joint_nm.m_action.images != joint_mo.n_action.images:
        raise LayerError("middle-action mismatch: shared action on M differs between joints")
    if joint_nm.n_size != first.n_size or joint_mo.m_size != second.m_size:
        raise LayerError("layer sizes do not match the joint actions")

    w1 = materialize(first.color_matrix, first_primes(first.color_matrix.base_color_count))
    w2 = materialize(second.color_matrix, first_primes(second.color_matrix.base_color_count))
    prod = w2 @ w1
    seen = set()
    pairs = []
    for gn, go in zip(joint_nm.n_action.images, joint_mo.m_action.images):
        key = (gn.images, go.images)
        if key not in seen:
            seen.add(key)
            pairs.append((gn, go))
    exact_pass = all(matrix_commutes(prod, gn, go) for gn, go in pairs)

    rng = np.random.default_rng(seed)
    max_residual = 0.0
    for gn, go in pairs:
        for _ in range(trials):
            x = rng.integers(-9, 10, size=first.n_size).astype(float)
            lhs = permcore.act_on_vector(go, forward(second, forward(first, x)))
            rhs = forward(second, forward(first, permcore.act_on_vector(gn, x)))
            max_residual = max(max_residual, float(np.max(np.abs(lhs - rhs))))
    return EquivarianceReport(
        tested_elements=len(pairs),
        trials=trials,
        max_residual=max_residual,
        exact_pass=exact_pass,
        tolerance=tolerance,
        seed=seed,
        passed=exact_pass and max_residual <= tolerance,
    )


# ---------------------------------------------------------------------------
# group convolution (output identified with the group)


def group_conv_structure(
    joint: JointAction, genset, tie_across_orbits: bool = False
) -> SharingStructure:
    """Sparse design with the output regular over G; optionally tie across input orbits.

    Tying keeps one color per (output orbit, generator) pair, merging the edge
    sets of the per-input-orbit relations, which matches sharing one parameter
    theta_a across all input orbits.
    """
    if joint.m_size != joint.group.order:
        raise LayerError(
            f"group convolution needs m_size == |G| ({joint.group.order}), got {joint.m_size}"
        )
    if not permcore.classify_action(joint.m_action).regular:
        raise LayerError("group convolution needs the output action to be regular over G")
    s = designs.sparse_design(joint, genset)
    if not tie_across_orbits:
        return s
    merged: dict[tuple[int, int], set] = {}
    orbit_lists: dict[tuple[int, int], list[int]] = {}
    for rel in s.relations:
        key = (rel.provenance["m_orbit"], rel.provenance["generator"])
        merged.setdefault(key, set()).update(rel.edges)
        orbit_lists.setdefault(key, []).append(rel.provenance["n_orbit"])
    relations = []
    for key in sorted(merged):
        q, a = key
        relations.append(
            Relation(
                len(relations) + 1,
                frozenset(merged[key]),
                {
                    "kind": "sparse_tied",
                    "m_orbit": q,
                    "generator": a,
                    "n_orbits": tuple(orbit_lists[key]),
                },
            )
        )
    return SharingStructure(s.n_size, s.m_size, tuple(relations), s.warnings)


def group_conv(
    joint: JointAction,
    genset,
    theta=None,
    tie_across_orbits: bool = False,
    nonlinearity: Nonlinearity = IDENTITY,
) -> TiedLayer:
    s = group_conv_structure(joint, genset, tie_across_orbits)
    return tied_layer_from_structure(s, theta, nonlinearity)


# ---------------------------------------------------------------------------
# graph convolution


def graph_conv_structure(adjacency) -> SharingStructure:
    """Structure whose merged layer is W(theta) = theta_1 B + theta_2 I.

    The adjacency relation holds the edges of the digraph (cell (m, n) of B),
    the identity relation the diagonal; diagonal cells with B[n, n] = 1 carry
    both colors and so weight theta_1 + theta_2.
    """
    b = np.asarray(adjacency)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise LayerError(f"adjacency matrix must be square, got shape {b.shape}")
    if not np.isin(b, (0, 1)).all():
        raise LayerError("adjacency matrix entries must be 0 or 1")
    n = b.shape[0]
    edges = frozenset((int(col), int(row)) for row in range(n) for col in range(n) if b[row, col])
    base = SharingStructure(n, n, (Relation(1, edges, {"kind": "adjacency"}),))
    return designs.with_identity_relation(base)
