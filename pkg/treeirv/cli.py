import argparse
import logging
import sys
import time
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import __version__, config
from .distortion import (
    distortion_scan,
    family_anchors,
    generate_family,
    parse_config_spec,
    parse_generator_spec,
    scan_table,
    social_costs,
    summarize_by_size,
)
from .documents import (
    CheckEntry,
    ConfigEntry,
    DistortionDocument,
    KillDocument,
    KillStatsEntry,
    RefutationEntry,
    RoundEntry,
    RunManifest,
    SelftestDocument,
    TraceDocument,
    TreeDocument,
    ZoneDocument,
    ZoneEntry,
    render_document,
)
from .election import format_trace, policy_preset, run_irv
from .errors import CheckDisagreementError, InputError, TreeIrvError
from .kill import KillQuery, kill_dp, verify_witness
from .oracle import (
    EnumerationBudget,
    brute_force_kill,
    brute_force_min_zone,
    brute_force_zone,
    brute_force_zones,
    enumerate_small_trees,
    micro_irv,
)
from .tree_core import load_tree, parse_tree, serialize_tree
from .zones import (
    build_loss_graph,
    check_nesting,
    closure,
    enumerate_zone_reports,
    min_zone_report,
    verify_zone,
    zone_generator,
)

logger = logging.getLogger(__name__)

# Path on four vertices with scrambled IDs; also shipped as fixtures/a10.tree
EXAMPLE_TREE_TEXT = "4\n1 2\n2 3\n3 4\nids 2 4 1 3\n"


def parse_vertex_list(text: str, what: str = "vertex list") -> List[int]:
    """'1,2,3' -> [1, 2, 3]; an empty string is the empty list"""
    text = (text or "").strip()
    if not text:
        return []
    try:
        return [int(token) for token in text.split(",")]
    except ValueError:
        raise InputError(f"malformed {what} {text!r}; expected comma-separated vertices")


def _sorted(vertices) -> List[int]:
    return sorted(int(v) for v in vertices)


class Context:
    """Resolved inputs shared by every subcommand"""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.anchors: Dict[str, int] = {}
        if getattr(args, "gen", None):
            family, param = parse_generator_spec(args.gen)
            self.tree = generate_family(family, param)
            self.anchors = family_anchors(family, param)
            self.source = f"gen:{args.gen}"
        elif getattr(args, "tree", None):
            self.tree = load_tree(args.tree)
            self.source = str(args.tree)
        else:
            raise InputError("give a tree with --tree PATH or --gen family:param")
        logger.info(f"Loaded tree with {self.tree.n} vertices from {self.source}")
        self.policy = policy_preset(getattr(args, "policy", "default"), self.tree)

    def manifest(self, **arguments) -> RunManifest:
        return RunManifest(
            subcommand=self.args.command,
            source=self.source,
            policy=self.policy.name,
            output_format=self.args.format,
            check=bool(getattr(self.args, "check", False)),
            seed=self.args.seed,
            jobs=self.args.jobs,
            arguments={k: str(v) for k, v in arguments.items()},
        )


def emit(args: argparse.Namespace, document, text: str):
    print(render_document(document) if args.format == "doc" else text)


def cmd_elect(args: argparse.Namespace) -> int:
    ctx = Context(args)
    candidates = parse_vertex_list(args.candidates, "candidate list")
    trace = run_irv(ctx.tree, candidates, ctx.policy)

    if args.check and ctx.policy.is_default_for(ctx.tree):
        expected = micro_irv(ctx.tree.n, ctx.tree.edges, ctx.tree.ids, candidates)
        if expected != trace.winner:
            raise CheckDisagreementError("elect", trace.winner, expected)

    document = TraceDocument(
        manifest=ctx.manifest(candidates=args.candidates),
        candidates=_sorted(trace.candidate_set),
        rounds=[RoundEntry(tally=r.tally, eliminated=r.eliminated) for r in trace.rounds],
        winner=trace.winner,
    )
    emit(args, document, format_trace(trace))
    return 0


def cmd_kill(args: argparse.Namespace) -> int:
    ctx = Context(args)
    query = KillQuery.build(ctx.tree, args.u, parse_vertex_list(args.allowed, "allowed list"))
    verdict = kill_dp(query, jobs=args.jobs)

    witness_winner = None
    if verdict.result:
        witness_winner = run_irv(ctx.tree, verdict.witness).winner

    oracle_result = None
    if args.check:
        oracle_result = brute_force_kill(ctx.tree, query.u, query.allowed)
        if oracle_result != verdict.result:
            logger.warning(f"Kill disagreement: dp={verdict.result} oracle={oracle_result}")
            raise CheckDisagreementError(f"kill u={query.u}", verdict.result, oracle_result)
        if verdict.result and not verify_witness(query, verdict.witness):
            raise CheckDisagreementError(f"kill witness u={query.u}", verdict.witness, "valid witness")

    stats = verdict.stats
    document = KillDocument(
        manifest=ctx.manifest(u=args.u, allowed=args.allowed),
        u=query.u,
        allowed=_sorted(query.allowed),
        result=verdict.result,
        witness=list(verdict.witness) if verdict.witness else None,
        witness_winner=witness_winner,
        stats=KillStatsEntry(
            tables_built=stats.tables_built,
            outer_tuples=stats.outer_tuples,
            peak_inner_states=stats.peak_inner_states,
            state_cap=stats.state_cap,
        ),
        oracle_result=oracle_result,
    )
    lines = [f"kill(u={query.u}, A={_sorted(query.allowed)}) = {str(verdict.result).lower()}"]
    if verdict.result:
        lines.append(f"witness: {' '.join(map(str, verdict.witness))} (winner {witness_winner})")
    if oracle_result is not None:
        lines.append("oracle: agrees")
    emit(args, document, "\n".join(lines))
    return 0


def _zone_entry(report, tournament) -> ZoneEntry:
    refutation = None
    if report.refutation is not None:
        r = report.refutation
        refutation = RefutationEntry(u=r.u, candidates=list(r.candidates), winner=r.winner)
    return ZoneEntry(
        zone=_sorted(report.zone),
        is_zone=report.is_zone,
        per_vertex={u: v.result for u, v in sorted(report.per_vertex.items())},
        refutation=refutation,
        generator=zone_generator(tournament, report.zone) if report.is_zone else None,
    )


def cmd_zone(args: argparse.Namespace) -> int:
    ctx = Context(args)
    tree = ctx.tree
    tournament = build_loss_graph(tree, jobs=args.jobs)

    if args.action == "verify":
        zone = parse_vertex_list(args.zone, "zone")
        reports = [verify_zone(tree, zone, ctx.policy, jobs=args.jobs)]
    elif args.action == "min":
        reports = [min_zone_report(tree, ctx.policy, jobs=args.jobs)]
    else:
        reports = enumerate_zone_reports(tree, ctx.policy, jobs=args.jobs)

    oracle_agrees = None
    if args.check:
        budget = EnumerationBudget()
        if args.action == "verify":
            computed, expected = reports[0].is_zone, brute_force_zone(tree, reports[0].zone, budget)
        elif args.action == "min":
            computed, expected = reports[0].zone, brute_force_min_zone(tree, budget)
        else:
            computed, expected = [r.zone for r in reports], brute_force_zones(tree, budget)
        if computed != expected:
            logger.warning(f"Zone {args.action} disagreement: computed={computed} oracle={expected}")
            raise CheckDisagreementError(f"zone {args.action}", computed, expected)
        oracle_agrees = True

    zones = [r.zone for r in reports if r.is_zone]
    violations = check_nesting(zones) if args.action == "enumerate" else []
    document = ZoneDocument(
        manifest=ctx.manifest(action=args.action, zone=args.zone or ""),
        action=args.action,
        zones=[_zone_entry(r, tournament) for r in reports],
        tournament_edges=[list(edge) for edge in tournament.edges],
        nesting_violations=[[_sorted(a), _sorted(b)] for a, b in violations],
        oracle_agrees=oracle_agrees,
    )

    lines = []
    for report in reports:
        verdict = "zone" if report.is_zone else "not a zone"
        line = f"{{{','.join(map(str, sorted(report.zone)))}}}: {verdict}"
        if report.refutation is not None:
            r = report.refutation
            line += f" (K={{{','.join(map(str, r.candidates))}}} elects {r.winner})"
        lines.append(line)
    if oracle_agrees:
        lines.append("oracle: agrees")
    emit(args, document, "\n".join(lines))
    return 0


def cmd_distortion(args: argparse.Namespace) -> int:
    ctx = Context(args)
    tree = ctx.tree
    configs = parse_config_spec(args.configs, tree, seed=args.seed, anchors=ctx.anchors)
    report = distortion_scan(tree, ctx.policy, configs, jobs=args.jobs)

    if args.check:
        costs = [int(sum(tree.dist_rows[v][1:])) for v in tree.vertices]
        for record in report.records:
            if ctx.policy.is_default_for(tree):
                expected = micro_irv(tree.n, tree.edges, tree.ids, record.candidates)
                if expected != record.winner:
                    raise CheckDisagreementError(f"winner of {record.candidates}", record.winner, expected)
            best = min(costs[c - 1] for c in record.candidates)
            if (record.winner_cost, record.optimum_cost) != (costs[record.winner - 1], best):
                raise CheckDisagreementError(
                    f"costs of {record.candidates}",
                    (record.winner_cost, record.optimum_cost),
                    (costs[record.winner - 1], best),
                )

    if args.table:
        scan_table(report).to_csv(args.table, index=False)
        logger.info(f"Wrote {len(report.records)} rows to {args.table}")

    worst = next(r for r in report.records if r.candidates == report.argmax)
    by_size = summarize_by_size(report)
    document = DistortionDocument(
        manifest=ctx.manifest(configs=args.configs),
        n=tree.n,
        anchors=ctx.anchors,
        configs=len(report.records),
        max_ratio=str(report.max_ratio),
        max_ratio_value=float(report.max_ratio),
        argmax=ConfigEntry(
            candidates=list(worst.candidates),
            winner=worst.winner,
            winner_cost=worst.winner_cost,
            optimum=worst.optimum,
            optimum_cost=worst.optimum_cost,
            ratio=str(worst.ratio),
        ),
        by_size={
            int(row["size"]): str(max(r.ratio for r in report.records if len(r.candidates) == row["size"]))
            for _, row in by_size.iterrows()
        },
    )
    ratio_line = f"max ratio: {report.max_ratio}"
    if worst.optimum_cost:
        ratio_line += f" = {worst.winner_cost}/{worst.optimum_cost}"
    text = "\n".join(
        [
            f"configurations: {len(report.records)} (policy {report.policy})",
            ratio_line,
            f"worst configuration: {','.join(map(str, worst.candidates))} "
            f"-> winner {worst.winner}, optimum {worst.optimum}",
        ]
    )
    emit(args, document, text)
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    if not args.gen:
        raise InputError("gen needs --gen family:param")
    ctx = Context(args)
    text = serialize_tree(ctx.tree)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
        logger.info(f"Wrote {args.gen} to {args.output}")

    costs = social_costs(ctx.tree)
    document = TreeDocument(
        manifest=ctx.manifest(output=args.output or "-"),
        n=ctx.tree.n,
        edges=[list(edge) for edge in ctx.tree.edges],
        ids=list(ctx.tree.ids),
        anchors=ctx.anchors,
        social_costs={v: int(costs[v - 1]) for v in ctx.tree.vertices},
    )
    emit(args, document, text.rstrip("\n"))
    return 0


def _selftest_checks(max_n: int) -> List[Tuple[str, Callable[[], Tuple[bool, str]]]]:
    tree = parse_tree(EXAMPLE_TREE_TEXT)
    everything = frozenset(tree.vertices)

    def loss_edges():
        edges = build_loss_graph(tree).edges
        return edges == [(1, 2), (1, 3), (2, 3), (2, 4), (4, 1), (4, 3)], f"edges {edges}"

    def closures():
        tournament = build_loss_graph(tree)
        ok = closure(tournament, [3]) == {3} and all(closure(tournament, [v]) == everything for v in (1, 2, 4))
        return ok, "cl(3)={3}, cl(1)=cl(2)=cl(4)=V"

    def kill_examples():
        unkillable = kill_dp(KillQuery.build(tree, 3, [1, 2, 4]))
        killable_query = KillQuery.build(tree, 1, [2, 3, 4])
        killable = kill_dp(killable_query)
        ok = (
            not unkillable.result
            and killable.result
            and verify_witness(killable_query, killable.witness)
        )
        return ok, f"Kill(3,{{1,2,4}})={unkillable.result}, Kill(1,{{2,3,4}})={killable.result}"

    def zone_examples():
        smallest = min_zone_report(tree).zone
        zones = [r.zone for r in enumerate_zone_reports(tree)]
        ok = smallest == {3} and zones == [frozenset({3}), everything]
        return ok, f"min={_sorted(smallest)} zones={[_sorted(z) for z in zones]}"

    def oracle_sweep():
        checked = 0
        for n in range(1, max_n + 1):
            for small in enumerate_small_trees(n):
                for u in small.vertices:
                    others = [v for v in small.vertices if v != u]
                    for mask in range(1 << len(others)):
                        allowed = [v for i, v in enumerate(others) if mask >> i & 1]
                        dp = kill_dp(KillQuery.build(small, u, allowed)).result
                        if dp != brute_force_kill(small, u, allowed):
                            return False, f"disagreement on {small!r} u={u} A={allowed}"
                        checked += 1
        return True, f"{checked} Kill instances with n <= {max_n}"

    def path_lower_bound():
        path = generate_family("path", 9)
        report = distortion_scan(path, policy_preset("prop2", path), [(1, 5, 9)])
        return str(report.max_ratio) == "9/5", f"ratio {report.max_ratio}"

    def bistar_lower_bound():
        bistar = generate_family("bistar", 20)
        report = distortion_scan(bistar, policy_preset("prop3", bistar), parse_config_spec("size:2", bistar))
        return str(report.max_ratio) == "23/14", f"ratio {report.max_ratio}"

    return [
        ("loss_graph", loss_edges),
        ("closures", closures),
        ("kill_examples", kill_examples),
        ("zones", zone_examples),
        ("kill_oracle_sweep", oracle_sweep),
        ("path_prop2", path_lower_bound),
        ("bistar_prop3", bistar_lower_bound),
    ]


def cmd_selftest(args: argparse.Namespace) -> int:
    max_n = args.max_n if args.max_n is not None else config.SELFTEST_MAX_N
    entries = []
    for name, check in _selftest_checks(max_n):
        started = time.perf_counter()
        passed, detail = check()
        logger.info(f"Selftest {name}: {'ok' if passed else 'FAILED'} in {time.perf_counter() - started:.2f}s")
        entries.append(CheckEntry(name=name, passed=passed, detail=detail))

    passed = all(e.passed for e in entries)
    document = SelftestDocument(
        manifest=RunManifest(
            subcommand="selftest",
            source="builtin",
            output_format=args.format,
            seed=args.seed,
            jobs=args.jobs,
            arguments={"max_n": str(max_n)},
        ),
        checks=entries,
        passed=passed,
    )
    text = "\n".join(f"{'ok  ' if e.passed else 'FAIL'} {e.name}: {e.detail}" for e in entries)
    emit(args, document, text)
    return 0 if passed else CheckDisagreementError.exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treeirv", description="Instant-runoff voting analysis on trees")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument("--tree", help="tree file")
    source.add_argument("--gen", help="generator spec, e.g. path:9 or bistar:20")
    common.add_argument("--format", choices=("text", "doc"), default="text")
    common.add_argument("--jobs", type=int, default=config.DEFAULT_JOBS)
    common.add_argument("--seed", type=int, default=0)

    with_policy = argparse.ArgumentParser(add_help=False)
    with_policy.add_argument("--policy", default="default", help="tie policy preset: default, prop2, prop3")

    with_check = argparse.ArgumentParser(add_help=False)
    with_check.add_argument("--check", action="store_true", help="compare against the brute-force oracle")

    sub = parser.add_subparsers(dest="command", required=True)

    elect = sub.add_parser("elect", parents=[common, with_policy, with_check], help="run one IRV election")
    elect.add_argument("--candidates", required=True)
    elect.set_defaults(handler=cmd_elect)

    kill = sub.add_parser("kill", parents=[common, with_check], help="decide Kill(T, u, A)")
    kill.add_argument("-u", type=int, required=True)
    kill.add_argument("-A", "--allowed", default="")
    kill.set_defaults(handler=cmd_kill)

    zone = sub.add_parser("zone", parents=[common, with_check], help="verify, minimize or enumerate zones")
    zone.add_argument("action", choices=("verify", "min", "enumerate"))
    zone.add_argument("zone", nargs="?", default=None, help="comma-separated zone for verify")
    zone.set_defaults(handler=cmd_zone)

    distortion = sub.add_parser(
        "distortion", parents=[common, with_policy, with_check], help="scan candidate configurations"
    )
    distortion.add_argument("--configs", default="all")
    distortion.add_argument("--table", help="write one CSV row per configuration")
    distortion.set_defaults(handler=cmd_distortion)

    gen = sub.add_parser("gen", parents=[common], help="write a generated family tree")
    gen.add_argument("--output", help="tree file to write")
    gen.set_defaults(handler=cmd_gen)

    selftest = sub.add_parser("selftest", parents=[common], help="run the built-in acceptance checks")
    selftest.add_argument("--max-n", type=int, default=None)
    selftest.set_defaults(handler=cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=config.LOG_LEVEL, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "zone" and args.action == "verify" and not args.zone:
        print("error: zone verify needs a comma-separated zone", file=sys.stderr)
        return InputError.exit_code

    started = time.perf_counter()
    logger.info(f"Starting {args.command}")
    try:
        code = args.handler(args)
    except TreeIrvError as e:
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code
    logger.info(f"Finished {args.command} in {time.perf_counter() - started:.2f}s")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
