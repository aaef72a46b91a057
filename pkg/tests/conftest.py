import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from eqtie import designs, permcore as pc


# ---------------------------------------------------------------------------
# shared fixtures (the recurring test corpus)


@pytest.fixture(scope="session")
def z6():
    return pc.close_generators(pc.cyclic_generators(6))


@pytest.fixture(scope="session")
def reverse_conv(z6):
    """Z6 acting by right-shift generator on 3 points, left-shift on 6."""
    n_act = pc.build_action(z6, [pc.parse_cycles("(0 1 2)", 3)], 3)
    m_act = pc.build_action(z6, [pc.parse_cycles("(0 5 4 3 2 1)", 6)], 6)
    return pc.joint_action(n_act, m_act)


@pytest.fixture(scope="session")
def reverse_conv_structure(reverse_conv):
    return designs.sparse_design(reverse_conv, [1, 5])


@pytest.fixture(scope="session")
def mirror_conv():
    """Z2 mirror on 4 inputs, regular action on 2 outputs."""
    g2 = pc.close_generators(pc.cyclic_generators(2))
    n_act = pc.build_action(g2, [pc.parse_cycles("(0 3)(1 2)", 4)], 4)
    return pc.joint_action(n_act, pc.regular_action(g2))


@pytest.fixture(scope="session")
def rot90():
    """Z4 rotating two concentric 4-cycles on 8 points, same action on both sides."""
    g4 = pc.close_generators(pc.cyclic_generators(4))
    act = pc.build_action(g4, [pc.parse_cycles("(0 1 2 3)(4 5 6 7)", 8)], 8)
    return pc.joint_action(act, act)


@pytest.fixture(scope="session")
def rot90_structure(rot90):
    return designs.sparse_design(rot90, [1, 3])


def diagonal_symmetric_joint(n):
    g = pc.close_generators(pc.symmetric_generators(n))
    nat = pc.natural_action(g)
    return pc.joint_action(nat, nat)


def cyclic_group_conv_joint(n):
    g = pc.close_generators(pc.cyclic_generators(n))
    return pc.joint_action(pc.natural_action(g), pc.regular_action(g))


# ---------------------------------------------------------------------------
# acceptance reporting: one pass/fail line per criterion


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            name = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion" in name:
                label = name.split("::", 1)[1]
                verdict = "PASS" if outcome == "passed" else "FAIL"
                lines[label] = verdict
    if lines:
        terminalreporter.section("acceptance criteria")
        for label in sorted(lines):
            terminalreporter.write_line(f"ACCEPTANCE {label}: {lines[label]}")
