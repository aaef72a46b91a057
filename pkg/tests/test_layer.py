import itertools

import numpy as np
import pytest

import oracles
from eqtie import designs, layer, permcore as pc
from eqtie.designs import Relation, SharingStructure
from eqtie.layer import LayerError

from conftest import cyclic_group_conv_joint, diagonal_symmetric_joint


@pytest.fixture(scope="module")
def rc_layer(reverse_conv_structure):
    return layer.tied_layer_from_structure(reverse_conv_structure, np.array([1.0, 2.0]))


def perturbed_reverse_conv(reverse_conv_structure):
    """One extra color overlaid on a single tied cell: breaks the tying."""
    extra = Relation(3, frozenset({(1, 0)}), {"kind": "dense", "representative": (1, 0)})
    return SharingStructure(3, 6, reverse_conv_structure.relations + (extra,))


class TestMaterializeForward:
    def test_reference_weight_matrix(self, reverse_conv_structure):
        cm = designs.merge_colors(reverse_conv_structure)
        w = layer.materialize(cm, np.array([1, 2]))
        expected = np.array(
            [[0, 1, 2], [1, 2, 0], [2, 0, 1], [0, 1, 2], [1, 2, 0], [2, 0, 1]]
        )
        assert np.array_equal(w, expected)
        assert w.dtype == np.int64

    def test_zero_theta(self, reverse_conv_structure):
        cm = designs.merge_colors(reverse_conv_structure)
        assert not layer.materialize(cm, np.zeros(2)).any()

    def test_theta_length_mismatch(self, reverse_conv_structure):
        cm = designs.merge_colors(reverse_conv_structure)
        with pytest.raises(LayerError, match="theta length"):
            layer.materialize(cm, np.ones(3))

    def test_forward_single_spike(self, rc_layer):
        y = layer.forward(rc_layer, np.array([1.0, 0.0, 0.0]))
        assert np.array_equal(y, [0, 1, 2, 0, 1, 2])

    def test_forward_zero_input(self, rc_layer, reverse_conv_structure):
        zero = np.zeros(3)
        assert not layer.forward(rc_layer, zero).any()
        leaky_layer = layer.tied_layer_from_structure(
            reverse_conv_structure, np.array([1.0, 2.0]), layer.leaky(0.5)
        )
        assert not layer.forward(leaky_layer, zero).any()

    def test_leaky_definition(self):
        assert np.array_equal(layer.leaky(0.5).apply(np.array([-2.0, 4.0])), [-1.0, 4.0])

    def test_leaky_slope_validation(self):
        with pytest.raises(LayerError):
            layer.leaky(1.0)
        with pytest.raises(LayerError):
            layer.leaky(0.0)

    def test_first_primes(self):
        assert layer.first_primes(5).tolist() == [2, 3, 5, 7, 11]

    def test_require_distinct_theta(self, reverse_conv_structure):
        tied = layer.tied_layer_from_structure(reverse_conv_structure, np.array([1.0, 1.0]))
        with pytest.raises(LayerError, match="distinct"):
            tied.require_distinct_theta()


class TestCheckEquivariance:
    def test_reverse_conv_passes_exactly(self, rc_layer, reverse_conv):
        rep = layer.check_equivariance(rc_layer, reverse_conv, trials=4)
        assert rep.passed and rep.exact_pass
        assert rep.max_residual == 0.0
        assert rep.tested_elements == 6

    def test_s4_dense_passes(self):
        joint = diagonal_symmetric_joint(4)
        tied = layer.tied_layer_from_structure(designs.dense_design(joint))
        assert layer.check_equivariance(tied, joint, trials=3).passed

    def test_broken_tie_fails(self, reverse_conv_structure, reverse_conv):
        tied = layer.tied_layer_from_structure(perturbed_reverse_conv(reverse_conv_structure))
        rep = layer.check_equivariance(tied, reverse_conv, trials=4)
        assert not rep.passed and not rep.exact_pass
        assert rep.max_residual > 0

    def test_size_mismatch(self, rc_layer):
        joint = diagonal_symmetric_joint(4)
        with pytest.raises(LayerError):
            layer.check_equivariance(rc_layer, joint)

    def test_nonlinearity_transparency(self, reverse_conv_structure, reverse_conv):
        for structure in (reverse_conv_structure, perturbed_reverse_conv(reverse_conv_structure)):
            verdicts = []
            for sigma in (layer.IDENTITY, layer.leaky(0.5)):
                tied = layer.tied_layer_from_structure(structure, nonlinearity=sigma)
                verdicts.append(layer.check_equivariance(tied, reverse_conv, trials=4).passed)
            assert verdicts[0] == verdicts[1]

    def test_generator_sufficiency(self, reverse_conv, rot90, mirror_conv):
        # commutation on the generator pairs alone already decides the verdict
        for joint in (reverse_conv, rot90, mirror_conv):
            genset = pc.symmetrize_genset(joint.group, joint.group.generator_ids)
            s = designs.sparse_design(joint, genset)
            w = layer.materialize(designs.merge_colors(s), layer.first_primes(s.base_color_count))
            gen_ok = all(
                layer.matrix_commutes(w, joint.n_action.images[g], joint.m_action.images[g])
                for g in joint.group.generator_ids
            )
            full_ok = all(
                layer.matrix_commutes(w, gn, gm) for gn, gm in joint.joint_elements
            )
            assert gen_ok and full_ok

    def test_report_records_seed(self, rc_layer, reverse_conv):
        rep = layer.check_equivariance(rc_layer, reverse_conv, trials=2, seed=17)
        assert rep.seed == 17 and rep.trials == 2

    def test_matrix_commutes_matches_literal_products(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            m_size, n_size = int(rng.integers(2, 5)), int(rng.integers(2, 5))
            w = rng.integers(0, 3, size=(m_size, n_size))
            gn = pc.Permutation(tuple(rng.permutation(n_size).tolist()))
            gm = pc.Permutation(tuple(rng.permutation(m_size).tolist()))
            literal = np.array_equal(
                pc.permutation_matrix(gm) @ w, w @ pc.permutation_matrix(gn)
            )
            assert layer.matrix_commutes(w, gn, gm) == literal
            assert oracles.commutes_exactly(w, gn.images, gm.images) == literal


class TestSubgroupMonotonicity:
    def test_reverse_conv_even_subgroup(self, rc_layer, reverse_conv):
        # H: reference Z3, right-shift-2 on N paired with left-shift-2 on M
        z3 = pc.close_generators([pc.parse_cycles("(0 1 2)", 3)])
        n_sub = pc.build_action(z3, [pc.parse_cycles("(0 2 1)", 3)], 3)
        m_sub = pc.build_action(z3, [pc.parse_cycles("(0 4 2)(1 5 3)", 6)], 6)
        sub = pc.joint_action(n_sub, m_sub)
        assert sub.pair_set() <= reverse_conv.pair_set()
        assert sub.joint_order == 3
        assert layer.check_subgroup_monotonicity(rc_layer, reverse_conv, sub, trials=3)
        assert layer.check_equivariance(rc_layer, sub, trials=3).passed

    def test_trivial_subgroup(self, rc_layer, reverse_conv, z6):
        sub = pc.joint_action(pc.trivial_action(z6, 3), pc.trivial_action(z6, 6))
        assert layer.check_subgroup_monotonicity(rc_layer, reverse_conv, sub, trials=2)

    def test_s4_dense_two_element_subgroup(self):
        joint = diagonal_symmetric_joint(4)
        tied = layer.tied_layer_from_structure(designs.dense_design(joint))
        z2 = pc.close_generators([pc.parse_cycles("(0 1)", 4)])
        nat = pc.natural_action(z2)
        sub = pc.joint_action(nat, nat)
        assert sub.pair_set() <= joint.pair_set()
        assert layer.check_subgroup_monotonicity(tied, joint, sub, trials=3)

    def test_non_subset_rejected(self, rc_layer, reverse_conv):
        z2 = pc.close_generators([pc.parse_cycles("(0 1)", 3)])
        bad = pc.joint_action(pc.natural_action(z2), pc.trivial_action(z2, 6))
        with pytest.raises(LayerError, match="subset"):
            layer.check_subgroup_monotonicity(rc_layer, reverse_conv, bad)


class TestComposeLayers:
    def test_stacked_reverse_conv(self, rc_layer, reverse_conv, z6):
        swapped = pc.joint_action(reverse_conv.m_action, reverse_conv.n_action)
        second = layer.tied_layer_from_structure(designs.sparse_design(swapped, [1, 5]))
        rep = layer.compose_layers(rc_layer, second, reverse_conv, swapped, trials=3)
        assert rep.passed and rep.exact_pass

    def test_identity_second_layer(self, rc_layer, reverse_conv):
        diag = SharingStructure(
            6, 6, (Relation(1, frozenset((i, i) for i in range(6)), {"kind": "identity"}),)
        )
        ident_layer = layer.tied_layer_from_structure(diag, np.array([1.0]))
        m_diag = pc.joint_action(reverse_conv.m_action, reverse_conv.m_action)
        rep = layer.compose_layers(rc_layer, ident_layer, reverse_conv, m_diag, trials=4)
        base = layer.check_equivariance(rc_layer, reverse_conv, trials=4)
        assert rep.passed == base.passed
        assert rep.exact_pass == base.exact_pass
        assert rep.max_residual == base.max_residual

    def test_middle_mismatch(self, rc_layer, reverse_conv, z6):
        other_m = pc.build_action(z6, [pc.parse_cycles("(0 1 2 3 4 5)", 6)], 6)
        mismatched = pc.joint_action(other_m, reverse_conv.n_action)
        second = layer.tied_layer_from_structure(designs.sparse_design(mismatched, [1, 5]))
        with pytest.raises(LayerError, match="middle-action mismatch"):
            layer.compose_layers(rc_layer, second, reverse_conv, mismatched)


class TestGroupConv:
    @pytest.mark.parametrize("n", [4, 5, 7, 12])
    def test_matches_cross_correlation_oracle(self, n):
        joint = cyclic_group_conv_joint(n)
        rng = np.random.default_rng(n)
        theta = rng.normal(size=2)
        tied = layer.group_conv(joint, [1, n - 1], theta=theta)
        for _ in range(5):
            x = rng.normal(size=n)
            expected = oracles.circular_cross_correlation({1: theta[0], n - 1: theta[1]}, x)
            assert np.max(np.abs(layer.forward(tied, x) - expected)) < 1e-12

    def test_tie_across_orbits_structure(self, mirror_conv):
        untied = layer.group_conv_structure(mirror_conv, [1])
        tied = layer.group_conv_structure(mirror_conv, [1], tie_across_orbits=True)
        assert untied.base_color_count == 2
        assert tied.base_color_count == 1
        assert tied.relations[0].edges == untied.relations[0].edges | untied.relations[1].edges

    def test_tied_layer_still_equivariant(self, mirror_conv):
        tied = layer.group_conv(mirror_conv, [1], tie_across_orbits=True)
        assert layer.check_equivariance(tied, mirror_conv, trials=4).passed

    def test_output_must_be_regular(self, z6):
        n_act = pc.build_action(z6, [pc.parse_cycles("(0 1 2)", 3)], 3)
        bad = pc.joint_action(n_act, pc.build_action(z6, [pc.parse_cycles("(0 1 2)", 6)], 6))
        with pytest.raises(LayerError):
            layer.group_conv(bad, [1, 5])

    def test_m_size_mismatch(self, z6):
        n_act = pc.build_action(z6, [pc.parse_cycles("(0 1 2 3 4 5)", 6)], 6)
        m_act = pc.build_action(z6, [pc.parse_cycles("(0 1 2)", 3)], 3)
        joint = pc.joint_action(n_act, m_act)
        with pytest.raises(LayerError, match="m_size"):
            layer.group_conv(joint, [1, 5])


class TestGraphConv:
    def test_three_cycle(self):
        b = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
        s = layer.graph_conv_structure(b)
        assert s.base_color_count == 2
        cm = designs.merge_colors(s)
        theta = np.array([5.0, 11.0])
        w = layer.materialize(cm, theta)
        assert np.array_equal(w, theta[0] * b + theta[1] * np.eye(3))

    def test_diagonal_self_loop_sums(self):
        b = np.array([[1, 1], [0, 0]])
        s = layer.graph_conv_structure(b)
        w = layer.materialize(designs.merge_colors(s), np.array([1, 10]))
        assert w[0, 0] == 11 and w[0, 1] == 1 and w[1, 1] == 10 and w[1, 0] == 0

    def test_non_square_rejected(self):
        with pytest.raises(LayerError, match="square"):
            layer.graph_conv_structure(np.zeros((2, 3), dtype=int))

    def test_non_binary_rejected(self):
        with pytest.raises(LayerError, match="0 or 1"):
            layer.graph_conv_structure(np.array([[2]]))


class TestSensitivity:
    def test_commutation_iff_automorphism_mirror(self, mirror_conv):
        # exhaustive over S_4 x S_2: exact commutation with distinct-prime theta
        # holds exactly on aut(structure)
        from eqtie import autsearch

        s = layer.group_conv_structure(mirror_conv, [1])
        w = layer.materialize(designs.merge_colors(s), layer.first_primes(2))
        aut = autsearch.enumerate_automorphisms(s).pair_set()
        for pn in itertools.permutations(range(4)):
            for pm in itertools.permutations(range(2)):
                expected = (pn, pm) in aut
                assert oracles.commutes_exactly(w, pn, pm) == expected
