"""Command-line entry point.

Subcommands: ``group info``, ``design``, ``check equivariance``,
``certify unique``, ``export dot``. Exit codes: 0 success / check passed,
1 check failed (non-equivariant, or certification found a supergroup),
2 usage or spec errors. Machine outputs are always 0-based; --one-based only
changes the human-readable summary.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import autsearch, layer, permcore, specio
from .autsearch import AutSearchError
from .designs import DesignError
from .layer import LayerError
from .permcore import GroupError, format_cycles
from .specio import REPORT_SCHEMA, SpecError


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--spec", required=True, help="path to a problem-spec JSON document")
    p.add_argument("--seed", type=int, default=0, help="RNG seed for randomized checks")
    p.add_argument("--trials", type=int, default=layer.DEFAULT_TRIALS,
                   help="random inputs per group element")
    p.add_argument("--tolerance", type=float, default=layer.DEFAULT_TOLERANCE,
                   help="max |residual| for the float check")
    p.add_argument("--cap", type=int, default=permcore.DEFAULT_ORDER_CAP,
                   help="group-order and automorphism element cap")
    p.add_argument("--node-budget", type=int, default=autsearch.DEFAULT_NODE_BUDGET,
                   help="max n_size + m_size admitted to the automorphism search")
    p.add_argument("--out", help="write the JSON artifact here instead of stdout")
    p.add_argument("--dot", help="also write a DOT rendering here")
    p.add_argument("--one-based", action="store_true",
                   help="display indices 1-based (files stay 0-based)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eqtie",
        description="Compile, verify, and certify parameter-sharing structures "
        "for group-equivariant layers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    group_cmd = sub.add_parser("group", help="group and action diagnostics")
    group_sub = group_cmd.add_subparsers(dest="subcommand", required=True)
    _add_common(group_sub.add_parser("info", help="order, orbits, and action profiles"))

    _add_common(sub.add_parser("design", help="compile the sharing structure to a mask export"))

    check_cmd = sub.add_parser("check", help="verification commands")
    check_sub = check_cmd.add_subparsers(dest="subcommand", required=True)
    _add_common(check_sub.add_parser("equivariance", help="replay the commutation checks"))

    certify_cmd = sub.add_parser("certify", help="certification commands")
    certify_sub = certify_cmd.add_subparsers(dest="subcommand", required=True)
    _add_common(certify_sub.add_parser("unique", help="enumerate aut and compare to the joint group"))

    export_cmd = sub.add_parser("export", help="diagram exports")
    export_sub = export_cmd.add_subparsers(dest="subcommand", required=True)
    _add_common(export_sub.add_parser("dot", help="graphviz rendering of the structure"))
    return parser


def _load_spec(args) -> specio.ProblemSpec:
    try:
        text = Path(args.spec).read_text()
    except OSError as exc:
        raise SpecError("$", f"cannot read spec file: {exc}") from None
    return specio.parse_spec(text)


def _emit(args, text: str):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _disp(index: int, one_based: bool) -> int:
    return index + 1 if one_based else index


def _action_summary(name, action, one_based):
    profile = permcore.classify_action(action)
    orbit_part = permcore.orbits(action)
    members = [
        [_disp(i, one_based) for i in orbit_part.members(o)]
        for o in range(orbit_part.orbit_count)
    ]
    return {
        "name": name,
        "size": action.target_size,
        "orbit_count": orbit_part.orbit_count,
        "orbits": members,
        "representatives": [_disp(r, one_based) for r in orbit_part.representatives],
        "faithful": profile.faithful,
        "transitive": profile.transitive,
        "semi_regular": profile.semi_regular,
        "regular": profile.regular,
        "kernel_size": profile.kernel_size,
        "image_order": profile.image_order,
    }


def _run_group_info(args) -> int:
    spec = _load_spec(args)
    joint = spec.joint
    doc = {
        "schema": REPORT_SCHEMA,
        "kind": "group_info",
        "group_order": spec.group.order,
        "group_degree": spec.group.degree,
        "joint_order": joint.joint_order,
        "actions": [
            _action_summary("n_action", spec.n_action, False),
            _action_summary("m_action", spec.m_action, False),
        ],
    }
    lines = [
        f"group: order {spec.group.order}, degree {spec.group.degree}",
        f"joint pairing: order {joint.joint_order}",
    ]
    for name, action in (("n_action", spec.n_action), ("m_action", spec.m_action)):
        s = _action_summary(name, action, args.one_based)
        flags = ", ".join(
            k for k in ("faithful", "transitive", "semi_regular", "regular") if s[k]
        ) or "none of faithful/transitive/semi-regular"
        lines.append(
            f"{name}: size {s['size']}, {s['orbit_count']} orbit(s) {s['orbits']}, "
            f"kernel {s['kernel_size']}, image order {s['image_order']} [{flags}]"
        )
    if args.one_based:
        lines.append("(indices displayed 1-based)")
    if args.out:
        _emit(args, json.dumps(doc, indent=2) + "\n")
    print("\n".join(lines))
    return 0


def _run_design(args) -> int:
    spec = _load_spec(args)
    structure = specio.build_structure(spec)
    doc = specio.build_mask_document(spec, structure, certification=None)
    _emit(args, specio.dump_mask(doc))
    if args.dot:
        Path(args.dot).write_text(specio.to_dot(structure, spec.mode == "digraph"))
    return 0


def _run_check(args) -> int:
    spec = _load_spec(args)
    structure = specio.build_structure(spec)
    tied = layer.tied_layer_from_structure(structure)
    report = layer.check_equivariance(
        tied, specio.expanded_joint(spec),
        trials=args.trials, tolerance=args.tolerance, seed=args.seed,
    )
    doc = {
        "schema": REPORT_SCHEMA,
        "kind": "equivariance",
        "tested_elements": report.tested_elements,
        "trials": report.trials,
        "max_residual": report.max_residual,
        "exact_pass": report.exact_pass,
        "tolerance": report.tolerance,
        "seed": report.seed,
        "passed": report.passed,
    }
    _emit(args, json.dumps(doc, indent=2) + "\n")
    return 0 if report.passed else 1


def _run_certify(args) -> int:
    spec = _load_spec(args)
    structure = specio.build_structure(spec)
    cert = autsearch.certify_unique(
        structure, specio.expanded_joint(spec),
        node_budget=args.node_budget, element_cap=args.cap,
    )
    witness = None
    if cert.witness is not None:
        witness = [format_cycles(cert.witness[0]), format_cycles(cert.witness[1])]
    block = {
        "verdict": cert.verdict,
        "aut_order": cert.aut_order,
        "joint_order": cert.joint_order,
        "witness": witness,
        "seed": args.seed,
        "element_cap": args.cap,
        "node_budget": args.node_budget,
    }
    doc = specio.build_mask_document(spec, structure, certification=block)
    _emit(args, specio.dump_mask(doc))
    if cert.verdict == "unique":
        print(f"unique: aut order {cert.aut_order} = joint order {cert.joint_order}",
              file=sys.stderr)
        return 0
    wn, wm = cert.witness
    print(
        f"supergroup: aut order {cert.aut_order} > joint order {cert.joint_order}; "
        f"witness pi_N={format_cycles(wn, args.one_based)} "
        f"pi_M={format_cycles(wm, args.one_based)}",
        file=sys.stderr,
    )
    return 1


def _run_export_dot(args) -> int:
    spec = _load_spec(args)
    structure = specio.build_structure(spec)
    text = specio.to_dot(structure, spec.mode == "digraph")
    if args.dot:
        Path(args.dot).write_text(text)
    else:
        _emit(args, text)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    key = (args.command, getattr(args, "subcommand", None))
    runners = {
        ("group", "info"): _run_group_info,
        ("design", None): _run_design,
        ("check", "equivariance"): _run_check,
        ("certify", "unique"): _run_certify,
        ("export", "dot"): _run_export_dot,
    }
    try:
        return runners[key](args)
    except (SpecError, GroupError, DesignError, LayerError, AutSearchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
