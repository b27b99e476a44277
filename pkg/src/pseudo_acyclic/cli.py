"""Command-line interface for pseudo-acyclic."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from . import __version__
from .config import CODENAME, RunSettings
from .events import emit_event, enable_default_sink
from .gim_rep import (
    LinearOrdering,
    build_gim,
    gim_report,
    pi_generators,
)
from .intmat import format_matrix, to_rows
from .ordering_builder import (
    build_pseudo_acyclic_ordering,
    find_triangles,
    ordering_valid,
)
from .quiver_core import (
    MutationSequence,
    QuiverMatrix,
    Seed,
    an_membership_oracle,
    apply_sequence,
    format_quiver,
    load_quiver,
    validate_type_an,
)
from .reflection_engine import format_word, reflections_after
from .suite import (
    EXPECTED_COUNTEREXAMPLE_PASSES,
    format_results_table,
    load_suite,
    run_suite,
    summarize_results,
)
from .utils import PseudoAcyclicError, PreconditionError, dump_json, parse_label_list
from .walk_explorer import (
    bfs_verify,
    check_stable_walk,
    check_swap_effect,
    check_swap_lemma_forms,
    elementary_swap_sequence,
    random_walk_fuzz,
    reproduce_counterexample,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2


_SETTING_FLAGS: dict[str, tuple[str, str]] = {
    "budget": ("budget", "--budget"),
    "workers": ("workers", "--workers"),
    "fuzz_length": ("length", "--len"),
    "fuzz_trials": ("trials", "--trials"),
}


@dataclass(frozen=True)
class RunConfig:
    """Resolved options for one command; flags override env, env overrides defaults."""

    command: str
    quiver: Path | None = None
    ordering: str | None = None
    seq: str = ""
    budget: int = 0
    workers: int = 1
    fuzz_length: int = 0
    fuzz_trials: int = 0
    token: int | None = None
    pair: tuple[int, int] | None = None
    prefix: str = ""
    suffix: str = ""
    output: str = "text"
    report: Path | None = None
    sources: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace, settings: RunSettings) -> RunConfig:
        def pick(name: str, fallback: Any) -> Any:
            value = getattr(args, name, None)
            return fallback if value is None else value

        sources = settings.sources()
        for key, (dest, option) in _SETTING_FLAGS.items():
            if getattr(args, dest, None) is not None:
                sources[key] = f"flag:{option}"
        raw_pair = getattr(args, "pair", None)
        quiver = getattr(args, "quiver", None)
        report = getattr(args, "report", None)
        return cls(
            command=args.command,
            quiver=Path(quiver) if quiver else None,
            ordering=getattr(args, "ordering", None),
            seq=pick("seq", ""),
            budget=pick("budget", settings.budget),
            workers=pick("workers", settings.workers),
            fuzz_length=pick("length", settings.fuzz_length),
            fuzz_trials=pick("trials", settings.fuzz_trials),
            token=getattr(args, "token", None),
            pair=_parse_pair(raw_pair) if raw_pair else None,
            prefix=pick("prefix", ""),
            suffix=pick("suffix", ""),
            output="json" if getattr(args, "json", False) else "text",
            report=Path(report) if report else None,
            sources=sources,
        )

    @property
    def json(self) -> bool:
        return self.output == "json"

    def summary(self) -> dict[str, Any]:
        data = asdict(self)
        return {key: str(value) if isinstance(value, Path) else value for key, value in data.items()}


def _parse_pair(raw: str) -> tuple[int, int]:
    labels = parse_label_list(raw, what="pair")
    if len(labels) != 2:
        raise PreconditionError(f"--pair expects two labels 'i,j', got {raw!r}")
    return labels[0], labels[1]


def _parse_csv(raw: str | None) -> list[str]:
    if not raw:
        return []
    return [token.strip() for token in raw.split(",") if token.strip()]


def _emit_json(payload: dict[str, Any]) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _warn(command: str, message: str) -> None:
    print(f"[{command}] warning: {message}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=CODENAME,
        description="Quiver mutation, mutated reflections and pseudo-acyclic ordering checks",
    )
    parser.add_argument("--version", action="version", version=f"{CODENAME} {__version__}")
    sub = parser.add_subparsers(dest="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="Emit a JSON document instead of text")

    quiver_arg = argparse.ArgumentParser(add_help=False)
    quiver_arg.add_argument("quiver", help="Quiver file: n, then n rows of integers")

    ordering_arg = argparse.ArgumentParser(add_help=False)
    ordering_arg.add_argument(
        "--ordering",
        help="Linear ordering 'a,b,c' listed ≺-ascending (default: constructed)",
    )

    mutate_parser = sub.add_parser(
        "mutate", parents=[common, quiver_arg], help="Print B and C after a mutation sequence"
    )
    mutate_parser.add_argument("--seq", default="", help="Mutation sequence 'i,j,k'")

    reflections_parser = sub.add_parser(
        "reflections",
        parents=[common, quiver_arg, ordering_arg],
        help="Print mutated reflections, their π matrices and the L-matrix",
    )
    reflections_parser.add_argument("--seq", default="", help="Mutation sequence 'i,j,k'")

    sub.add_parser(
        "gim",
        parents=[common, quiver_arg, ordering_arg],
        help="Print the GIM and the π generators for an ordering",
    )
    sub.add_parser(
        "ordering",
        parents=[common, quiver_arg],
        help="Construct a pseudo-acyclic ordering and report triangle constraints",
    )

    validate_parser = sub.add_parser(
        "validate-an", parents=[common, quiver_arg], help="Structural type-Aₙ check"
    )
    validate_parser.add_argument(
        "--oracle",
        action="store_true",
        help="Also search the mutation class for a path orientation",
    )

    verify_parser = sub.add_parser(
        "verify",
        parents=[common, quiver_arg, ordering_arg],
        help="Walk the labelled exchange graph and check π-images agree",
    )
    verify_parser.add_argument("--budget", type=int, help="Labelled seed budget")
    verify_parser.add_argument("--workers", type=int, help="Worker threads per BFS layer")
    verify_parser.add_argument("--report", help="Also write the JSON report to this path")

    swap_parser = sub.add_parser(
        "swap",
        parents=[common, quiver_arg, ordering_arg],
        help="Run the elementary swap p[i,j,i,j,i]p' and check its effect",
    )
    swap_parser.add_argument("--prefix", default="", help="Prefix p")
    swap_parser.add_argument("--pair", required=True, help="Swap labels 'i,j'")

    stable_parser = sub.add_parser(
        "stable-walk",
        parents=[common, quiver_arg, ordering_arg],
        help="Check u p [i,j,i,j] p⁻¹ w against u w",
    )
    stable_parser.add_argument("--prefix", default="", help="Prefix p")
    stable_parser.add_argument("--pair", required=True, help="Commuting labels 'i,j'")
    stable_parser.add_argument("--seq", default="", help="Leading walk u")
    stable_parser.add_argument("--suffix", default="", help="Trailing walk w")

    fuzz_parser = sub.add_parser(
        "fuzz",
        parents=[common, quiver_arg, ordering_arg],
        help="Random walks; every return to C = I must restore π-images",
    )
    fuzz_parser.add_argument("--len", dest="length", type=int, help="Walk length")
    fuzz_parser.add_argument("--trials", type=int, help="Number of walks")
    fuzz_parser.add_argument("--token", type=int, help="Reproducibility token")

    sub.add_parser(
        "counterexample",
        parents=[common],
        help="Check all six orderings of the oriented triangle",
    )

    suite_parser = sub.add_parser(
        "suite", parents=[common], help="Run cases from a verification suite manifest"
    )
    suite_parser.add_argument("manifest", help="Path to a verify-suite.v1 YAML manifest")
    suite_parser.add_argument("--names", help="Comma-separated case names to run")
    suite_parser.add_argument(
        "--list",
        action="store_true",
        help="List configured cases without running them",
    )
    suite_parser.add_argument(
        "--fail-fast",
        dest="fail_fast",
        action="store_true",
        help="Stop after the first failing case (overrides manifest default)",
    )
    suite_parser.add_argument(
        "--no-fail-fast",
        dest="fail_fast",
        action="store_false",
        help="Never stop early when cases fail (overrides manifest default)",
    )
    suite_parser.set_defaults(fail_fast=None)

    return parser


def _load(cfg: RunConfig) -> QuiverMatrix:
    assert cfg.quiver is not None
    return load_quiver(cfg.quiver)


def _resolve_ordering(cfg: RunConfig, b: QuiverMatrix) -> LinearOrdering:
    if not cfg.ordering:
        return build_pseudo_acyclic_ordering(b)
    ordering = LinearOrdering.parse(cfg.ordering)
    check = ordering_valid(b, ordering)
    if not check.valid:
        violated = ", ".join(constraint.describe() for constraint in check.violations)
        _warn(cfg.command, f"ordering {ordering.format()} violates {violated}")
    return ordering


def cmd_mutate(cfg: RunConfig) -> int:
    b = _load(cfg)
    w = MutationSequence.parse(cfg.seq).validate(b.n)
    seed = apply_sequence(Seed.initial(b), w)
    if cfg.json:
        _emit_json({"seq": list(w.indices), "B": seed.b.to_rows(), "C": to_rows(seed.c)})
        return EXIT_OK
    print(format_quiver(seed.b, comment=f"B after {w.describe()}"), end="")
    print(f"# C after {w.describe()}")
    print(format_matrix(seed.c))
    return EXIT_OK


def cmd_reflections(cfg: RunConfig) -> int:
    b = _load(cfg)
    w = MutationSequence.parse(cfg.seq).validate(b.n)
    ordering = _resolve_ordering(cfg, b)
    _, state = reflections_after(Seed.initial(b), w)
    report = gim_report(build_gim(b, ordering), state)
    if cfg.json:
        _emit_json(
            {
                "seq": list(w.indices),
                "ordering": ordering.format(),
                **state.to_dict(),
                "pi": report["pi"],
                "L": report["L"],
            }
        )
        return EXIT_OK
    print(f"[reflections] ordering {ordering.describe()}, sequence {w.describe()}")
    for index in range(1, b.n + 1):
        print(f"r_{index} = {format_word(state.r(index))}    g_{index} = {format_word(state.g(index))}")
    for index, rows in enumerate(report["pi"], start=1):
        print(f"# π(r_{index})")
        print("\n".join(" ".join(str(value) for value in row) for row in rows))
    print("# L")
    print("\n".join(" ".join(str(value) for value in row) for row in report["L"]))
    return EXIT_OK


def cmd_gim(cfg: RunConfig) -> int:
    b = _load(cfg)
    ordering = _resolve_ordering(cfg, b)
    gim = build_gim(b, ordering)
    generators = pi_generators(gim)
    if cfg.json:
        _emit_json(
            {
                "ordering": ordering.format(),
                "gim": gim.to_rows(),
                "generators": [to_rows(matrix) for matrix in generators],
            }
        )
        return EXIT_OK
    print(f"# GIM for {ordering.describe()}")
    print(format_matrix(gim.entries))
    for index, matrix in enumerate(generators, start=1):
        print(f"# π(s_{index})")
        print(format_matrix(matrix))
    return EXIT_OK


def cmd_ordering(cfg: RunConfig) -> int:
    b = _load(cfg)
    ordering = build_pseudo_acyclic_ordering(b)
    constraints = find_triangles(b)
    if cfg.json:
        _emit_json(
            {
                "ordering": ordering.format(),
                "triangles": [constraint.to_dict() for constraint in constraints],
                "check": ordering_valid(b, ordering).to_dict(),
            }
        )
        return EXIT_OK
    print(ordering.format())
    for constraint in constraints:
        allowed = " | ".join(
            "≺".join(str(label) for label in chain) for chain in constraint.allowed_chains()
        )
        restricted = "≺".join(str(label) for label in constraint.restriction(ordering))
        print(f"[ordering] triangle {constraint.describe()}: {restricted} in {{{allowed}}}")
    return EXIT_OK


def cmd_validate_an(cfg: RunConfig, *, oracle: bool) -> int:
    b = _load(cfg)
    report = validate_type_an(b)
    payload = report.to_dict()
    if not report.accepted:
        emit_event("validate", "rejected", n=report.n, reasons=list(report.reasons))
    agrees = True
    if oracle:
        payload["oracle"] = an_membership_oracle(b)
        agrees = payload["oracle"] == report.accepted
    if cfg.json:
        _emit_json(payload)
    else:
        verdict = "ACCEPTED" if report.accepted else "REJECTED"
        print(f"[validate-an] {verdict}: n={report.n}, m={report.m}, q={report.q}")
        for reason in report.reasons:
            print(f"[validate-an] - {reason}")
        if oracle:
            print(f"[validate-an] oracle: {'member' if payload['oracle'] else 'not a member'}")
    if not agrees:
        _warn(cfg.command, "structural check and mutation-class oracle disagree")
    return EXIT_OK if report.accepted and agrees else EXIT_VIOLATION


def cmd_verify(cfg: RunConfig) -> int:
    b = _load(cfg)
    report_check = validate_type_an(b)
    if not report_check.accepted:
        raise PreconditionError("quiver is not of type A_n: " + "; ".join(report_check.reasons))
    ordering = _resolve_ordering(cfg, b)
    report = bfs_verify(b, ordering, cfg.budget, workers=cfg.workers)
    payload = report.to_dict()
    if cfg.report is not None:
        dump_json(cfg.report, payload)
    if cfg.json:
        _emit_json({**payload, "config": cfg.summary()})
    else:
        print(
            f"[verify] {report.verdict.upper()}: {report.seeds} seeds, {report.edges} edges "
            f"(ordering {ordering.describe()}, depth {report.depth})"
        )
        for violation in report.violations[:5]:
            print(f"[verify] - {violation.describe()}")
        if len(report.violations) > 5:
            print(f"[verify] ... {len(report.violations) - 5} more")
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_swap(cfg: RunConfig) -> int:
    b = _load(cfg)
    assert cfg.pair is not None
    i, j = cfg.pair
    ordering = _resolve_ordering(cfg, b)
    p = MutationSequence.parse(cfg.prefix)
    sequence = elementary_swap_sequence(p, i, j, Seed.initial(b))
    effect = check_swap_effect(b, ordering, p, i, j)
    forms = check_swap_lemma_forms(b, ordering, p, i, j)
    passed = effect.passed and forms.passed
    if cfg.json:
        _emit_json(
            {
                "verdict": "pass" if passed else "fail",
                "sequence": list(sequence.indices),
                "effect": effect.to_dict(),
                "forms": forms.to_dict(),
            }
        )
    else:
        print(f"[swap] {'PASS' if passed else 'FAIL'}: {sequence.describe()}")
        print(f"[swap] B relabelled: {effect.b_matches}, C relabelled: {effect.c_matches}")
        if effect.mismatched:
            print(f"[swap] π-images not transposed at {list(effect.mismatched)}")
        for match in forms.matches:
            found = match.candidate or "no candidate matched"
            print(f"[swap] r_{match.label} (case {match.case}): {found}")
    return EXIT_OK if passed else EXIT_VIOLATION


def cmd_stable_walk(cfg: RunConfig) -> int:
    b = _load(cfg)
    assert cfg.pair is not None
    i, j = cfg.pair
    ordering = _resolve_ordering(cfg, b)
    report = check_stable_walk(
        b,
        ordering,
        MutationSequence.parse(cfg.prefix),
        i,
        j,
        MutationSequence.parse(cfg.seq),
        MutationSequence.parse(cfg.suffix),
    )
    if cfg.json:
        _emit_json({"verdict": "pass" if report.passed else "fail", **report.to_dict()})
    else:
        print(f"[stable-walk] {'PASS' if report.passed else 'FAIL'}: seed matches {report.seed_matches}")
        if report.mismatched:
            print(f"[stable-walk] π-images differ at {list(report.mismatched)}")
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_fuzz(cfg: RunConfig) -> int:
    b = _load(cfg)
    ordering = _resolve_ordering(cfg, b)
    report = random_walk_fuzz(b, ordering, cfg.fuzz_length, cfg.fuzz_trials, cfg.token)
    if cfg.json:
        _emit_json({**report.to_dict(), "config": cfg.summary()})
    else:
        print(
            f"[fuzz] {report.verdict.upper()}: {report.trials} walks of length {report.length}, "
            f"{report.hits} returns to C = I (token {report.token})"
        )
        for violation in report.violations[:5]:
            print(f"[fuzz] - {violation.describe()}")
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_counterexample(cfg: RunConfig) -> int:
    cases = reproduce_counterexample()
    holding = {case.ordering.format() for case in cases if case.holds}
    matches = holding == EXPECTED_COUNTEREXAMPLE_PASSES and all(
        case.bfs is not None and case.bfs.passed == case.holds for case in cases
    )
    if cfg.json:
        _emit_json(
            {
                "verdict": "pass" if matches else "fail",
                "cases": [case.to_dict() for case in cases],
            }
        )
        return EXIT_OK if matches else EXIT_VIOLATION
    print("[counterexample] oriented triangle 1→2→3→1, seed [2]")
    if cases:
        first = cases[0]
        print(
            f"[counterexample] r_1 = {first.r1}, r_3 = {first.r3}, r_1 r_3 = {first.r1r3}"
        )
    for case in cases:
        status = "holds" if case.holds else "FAILS"
        bfs = f", verify {case.bfs.verdict.upper()}" if case.bfs is not None else ""
        print(f"{case.ordering.describe():<8} (π(r_1 r_3))^2 = I {status}{bfs}")
        if not case.holds:
            print(format_matrix(case.product))
    return EXIT_OK if matches else EXIT_VIOLATION


def cmd_suite(args: argparse.Namespace) -> int:
    manifest = load_suite(Path(args.manifest))
    if args.list:
        for note in manifest.notes:
            print(f"[suite] note: {note}")
        if not manifest.cases:
            print("[suite] No cases declared in manifest.")
        for case in manifest.cases:
            description = f" - {case.description}" if case.description else ""
            tags = f" [{', '.join(case.tags)}]" if case.tags else ""
            print(f"- {case.name} ({case.kind}{tags}, expect {case.expect}){description}")
        return EXIT_OK
    selected_names = _parse_csv(args.names)
    exit_code, results = run_suite(
        manifest, names=selected_names, fail_fast=args.fail_fast, verbose=not args.json
    )
    if args.json:
        summary = dict(summarize_results(results))
        summary.update(
            {
                "command": "suite",
                "exit_code": exit_code,
                "manifest": str(manifest.path) if manifest.path else None,
                "selected": selected_names,
                "notes": manifest.notes,
            }
        )
        _emit_json(summary)
        return exit_code
    for note in manifest.notes:
        print(f"[suite] note: {note}")
    if results:
        print(format_results_table(results))
    else:
        print("[suite] No cases declared in manifest.")
    if exit_code != 0:
        print(f"[suite] {sum(1 for result in results if not result.passed)} case(s) did not pass.")
    return exit_code


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "suite":
        return cmd_suite(args)
    cfg = RunConfig.from_args(args, RunSettings.from_env())
    if args.command == "mutate":
        return cmd_mutate(cfg)
    if args.command == "reflections":
        return cmd_reflections(cfg)
    if args.command == "gim":
        return cmd_gim(cfg)
    if args.command == "ordering":
        return cmd_ordering(cfg)
    if args.command == "validate-an":
        return cmd_validate_an(cfg, oracle=args.oracle)
    if args.command == "verify":
        return cmd_verify(cfg)
    if args.command == "swap":
        return cmd_swap(cfg)
    if args.command == "stable-walk":
        return cmd_stable_walk(cfg)
    if args.command == "fuzz":
        return cmd_fuzz(cfg)
    if args.command == "counterexample":
        return cmd_counterexample(cfg)
    raise PreconditionError(f"unknown command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return EXIT_INPUT
    enable_default_sink()
    try:
        return _dispatch(args)
    except PseudoAcyclicError as exc:
        print(f"[{args.command}] {exc}", file=sys.stderr)
        return exc.exit_code


def app() -> None:  # pragma: no cover - console script entry point
    raise SystemExit(main())


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
