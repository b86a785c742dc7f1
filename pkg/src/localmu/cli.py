"""Command-line front end.

Exit codes: 0 all checks pass, 1 a property fails, 2 usage or parse error,
3 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import balance as bal
from . import mucalc as mc
from .compositional import check_compositional, global_invariant_oracle, strongest_compositional_invariant
from .dsl import ParseError, parse_model
from .model import CapExceeded, ModelError
from .relations import RelationError, check_outward_facing, check_local_global_bisimilar, check_local_simulates_global
from .report import check, counting_report
from .spaces import build_global_space, build_local_space
from .tiles import FAMILIES, generate, induced_balance, validate_instance

OK, FAIL, USAGE, CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


def load(path: str):
    p = Path(path)
    if p.exists():
        return parse_model(p.read_text(), str(p))
    bundled = resources.files("localmu.models").joinpath(p.name)
    if bundled.is_file():
        return parse_model(bundled.read_text(), p.name)
    raise UsageError(f"no such model file: {path}")


def emit(args, data, lines):
    if args.json:
        print(json.dumps(data, indent=2, sort_keys=True, default=str))
    else:
        for line in lines:
            print(line)


def cmd_check(args):
    doc = load(args.model)
    rep = check(doc, args.formula, args.network, args.node, args.oracle)
    lines = [f"network {rep.network}: {rep.formula} ({'universal' if rep.universal else 'general'})"]
    for r in rep.results:
        lines.append(f"  {r.node}: local {'true' if r.local else 'false'} on {r.local_states} states; {r.claim.text}")
        if r.oracle is not None:
            lines.append(f"    oracle over {r.oracle['global_states']} global states: "
                         f"{'true' if r.oracle['holds'] else 'false'}")
            for step in r.oracle.get("trace", []):
                lines.append(f"      {json.dumps(step, sort_keys=True)}")
    emit(args, rep.to_json(), lines)
    return OK if rep.passed else FAIL


def _setup(doc, network=None):
    net = doc.network(network)
    B = bal.largest_balance(net)
    scheme = bal.representatives(net, B)
    inv = strongest_compositional_invariant(net, scheme)
    return net, B, scheme, inv


def cmd_balance(args):
    doc = load(args.model)
    net = doc.network(args.network)
    B = bal.largest_balance(net)
    scheme = bal.representatives(net, B)
    data = {
        "network": net.name,
        "triples": len(B),
        "classes": [list(c) for c in scheme.classes],
        "representatives": list(scheme.representatives),
        "normal_form": bal.is_normal(net),
        "valid": bool(bal.is_balance_relation(net, B)),
    }
    if len(net.nodes) <= 10:
        data["automorphisms"] = len(bal.find_automorphisms(bal.communication_relation(net)))
    lines = [f"network {net.name}: {len(B)} similarities in the largest balance relation",
             f"  classes: {' | '.join(' '.join(c) for c in scheme.classes)}",
             f"  representatives: {' '.join(scheme.representatives)}",
             f"  normal form: {data['normal_form']}"]
    emit(args, data, lines)
    return OK


def cmd_invariant(args):
    doc = load(args.model)
    net, B, scheme, inv = _setup(doc, args.network)
    valid = check_compositional(net, inv)
    data = {"network": net.name, "compositional": bool(valid),
            "sizes": {r: len(s) for r, s in inv.per_rep.items()}}
    if args.dump:
        data["theta"] = inv.to_json()
    lines = [f"network {net.name}: closure rules {'hold' if valid else 'fail: ' + str(valid.rule)}"]
    for r, s in inv.per_rep.items():
        lines.append(f"  theta[{r}]: {len(s)} local states")
        if args.dump:
            lines.extend(f"    {net.local_text(x)}" for x in sorted(s))
    if args.oracle is not None:
        orc = global_invariant_oracle(net, inv, args.oracle)
        data["oracle"] = {"holds": orc.holds, "kind": orc.kind, "reachable": orc.reachable_count}
        lines.append(f"  oracle over {orc.reachable_count} reachable states: {'holds' if orc else orc.kind}")
        if not orc:
            emit(args, data, lines)
            return FAIL
    emit(args, data, lines)
    return OK if valid else FAIL


def cmd_spaces(args):
    doc = load(args.model)
    net, B, scheme, inv = _setup(doc, args.network)
    if args.node not in net.node_index:
        raise UsageError(f"unknown node {args.node!r}")
    lts = (build_global_space(net, args.node, args.cap) if args.global_space
           else build_local_space(net, inv, args.node))
    describe = net.global_text if args.global_space else net.local_text
    if args.dump:
        Path(args.dump).write_text(lts.dump(lambda p: json.dumps(describe(p), sort_keys=True)
                                            if args.global_space else describe(p)))
    data = {"node": args.node, "kind": "global" if args.global_space else "local", "states": lts.size,
            "transitions": len(lts.transitions), "initial": len(lts.initial),
            "labels": dict(sorted(lts.label_counts().items())), "totalized": len(lts.totalized)}
    lines = [f"{data['kind']} space of {args.node}: {lts.size} states, {len(lts.transitions)} transitions, "
             f"{len(lts.initial)} initial, {len(lts.totalized)} deadlocks closed with tau loops",
             "  labels: " + ", ".join(f"{k}={v}" for k, v in data["labels"].items())]
    emit(args, data, lines)
    return OK


def cmd_outward(args):
    doc = load(args.model)
    net, B, scheme, inv = _setup(doc, args.network)
    pairs = {}
    lines = [f"network {net.name}"]
    all_ok = True
    for n in sorted(net.nodes, key=bal.natural_key):
        for m in sorted(net.neighbors(n), key=bal.natural_key):
            v = check_outward_facing(net, inv, n, m)
            pairs[f"{n}->{m}"] = v.to_json()
            all_ok &= v.holds
            lines.append(f"  {n} facing {m}: {'outward-facing' if v else 'not outward-facing'}")
            if not v:
                lines.append(f"    {json.dumps(v.text, sort_keys=True)}")
    data = {"network": net.name, "pairs": pairs, "all": all_ok}
    if args.relations:
        data["local_global"] = {}
        for r in scheme.representatives:
            sim = check_local_simulates_global(net, inv, r, args.cap)
            bis = check_local_global_bisimilar(net, inv, r, args.cap, require_outward=False)
            data["local_global"][r] = {"simulation": sim.to_json(), "bisimulation": bis.to_json()}
            lines.append(f"  {r}: local simulates global {sim.holds}; stuttering bisimilar {bis.holds}")
    emit(args, data, lines)
    return OK if all_ok else FAIL


def _count(k, one, many):
    return f"{k} {one if k == 1 else many}"


def cmd_tiles(args):
    if args.generate:
        family, *params = args.generate
        if family not in FAMILIES:
            raise UsageError(f"unknown family {family!r}; expected one of {sorted(FAMILIES)}")
        try:
            nums = [int(p) for p in params]
        except ValueError:
            raise UsageError("family parameters must be integers")
        doc = load(args.model) if args.model else None
        try:
            inst = generate(family, *nums, tokens=args.tokens, doc=doc)
        except (TypeError, ValueError) as err:
            raise UsageError(str(err))
        net, ts, typing = inst.net, inst.tileset, inst.typing
    else:
        if not args.model:
            raise UsageError("give a model file or --generate")
        doc = load(args.model)
        net = doc.network(args.network)
        if not doc.tilesets:
            raise UsageError("model declares no tile set")
        ts = doc.tilesets[args.tileset] if args.tileset else next(iter(doc.tilesets.values()))
        typing = None
    v = validate_instance(ts, net, typing)
    data = {"network": net.name, "tileset": ts.name, "nodes": len(net.nodes), "edges": len(net.edges),
            "valid": v.valid}
    lines = [f"network {net.name} ({len(net.nodes)} nodes, {len(net.edges)} edges) against tiles {ts.name}: "
             f"{'instance' if v else 'not an instance'}"]
    if not v:
        data["violation"] = {"node": v.node, "direction": v.direction, "reason": v.reason}
        lines.append(f"  node {v.node}, direction {v.direction}: {v.reason}")
        emit(args, data, lines)
        return FAIL
    B = induced_balance(ts, net, typing)
    ok = bal.is_balance_relation(net, B)
    scheme = bal.representatives(net, B)
    data.update({"induced_triples": len(B), "balance_valid": ok.valid, "classes": [list(c) for c in scheme.classes],
                 "tiles": len(ts.tiles)})
    lines.append(f"  induced balance: {len(B)} triples, {'valid' if ok else 'invalid: ' + ok.reason}, "
                 f"{_count(len(scheme.classes), 'class', 'classes')} for {_count(len(ts.tiles), 'tile', 'tiles')}")
    emit(args, data, lines)
    return OK if ok else FAIL


def cmd_report(args):
    if args.what != "counting":
        raise UsageError(f"unknown report {args.what!r}")
    r = counting_report(args.m, args.n, args.b)
    lines = [f"counter abstraction C(m+n-1, n): {r.counter_size}",
             f"2^m:                              {r.two_to_m}",
             f"local representative m^b:         {r.local_size}",
             f"counter exceeds 2^m: {r.counter_exceeds_2m}; n > 2m: {r.n_exceeds_2m}"]
    emit(args, r.to_json(), lines)
    return OK


def build_parser():
    p = argparse.ArgumentParser(prog="localmu", description="Local symmetry reduction for process networks.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True):
        if model:
            sp.add_argument("model", help=".lmu file (or the name of a bundled model)")
        sp.add_argument("--network", help="network name (default: first in file)")
        sp.add_argument("--json", action="store_true", help="machine-readable output")

    c = sub.add_parser("check", help="check a formula on representative local spaces")
    common(c)
    c.add_argument("formula", help="formula name declared in the model, or formula text")
    g = c.add_mutually_exclusive_group()
    g.add_argument("--node", help="check this node only")
    g.add_argument("--all-reps", action="store_true", help="check every representative (default)")
    c.add_argument("--oracle", type=int, metavar="CAP", help="also check on the global space, up to CAP states")
    c.set_defaults(func=cmd_check)

    b = sub.add_parser("balance", help="largest balance relation and representatives")
    common(b)
    b.set_defaults(func=cmd_balance)

    i = sub.add_parser("invariant", help="strongest compositional invariant")
    common(i)
    i.add_argument("--dump", action="store_true", help="list the invariant's states")
    i.add_argument("--oracle", type=int, metavar="CAP", help="brute-force global check up to CAP states")
    i.set_defaults(func=cmd_invariant)

    s = sub.add_parser("spaces", help="build a local or global labeled transition system")
    common(s)
    s.add_argument("--node", required=True)
    s.add_argument("--global", dest="global_space", action="store_true", help="global space relative to the node")
    s.add_argument("--dump", metavar="FILE", help="write transitions and a state table")
    s.add_argument("--cap", type=int, default=10**6)
    s.set_defaults(func=cmd_spaces)

    o = sub.add_parser("outward", help="outward-facing check for every neighbour pair")
    common(o)
    o.add_argument("--relations", action="store_true", help="also check local/global (bi)simulation")
    o.add_argument("--cap", type=int, default=10**6)
    o.set_defaults(func=cmd_outward)

    t = sub.add_parser("tiles", help="validate an instance of a tile family")
    t.add_argument("model", nargs="?", help=".lmu file with a tile set")
    t.add_argument("--network")
    t.add_argument("--tileset")
    t.add_argument("--generate", nargs="+", metavar="ARG", help="family and parameters, e.g. torus 3 3")
    t.add_argument("--tokens", type=int, default=1)
    t.add_argument("--json", action="store_true")
    t.set_defaults(func=cmd_tiles)

    r = sub.add_parser("report", help="size comparisons")
    r.add_argument("what", choices=["counting"])
    r.add_argument("m", type=int, help="local states per process")
    r.add_argument("n", type=int, help="number of processes")
    r.add_argument("b", type=int, help="number of neighbours")
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapExceeded as err:
        print(f"resource cap exceeded: {err}", file=sys.stderr)
        return CAP
    except ParseError as err:
        print(str(err), file=sys.stderr)
        return USAGE
    except (UsageError, ModelError, mc.FormulaError, mc.EvaluationError, RelationError, bal.BalanceError,
            KeyError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
