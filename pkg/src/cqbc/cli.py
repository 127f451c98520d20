"""Command-line experiment runner.

One binary, four subcommands:

  table1   analytic vs. empirical per-slot detector distributions
  commit   full honest commit + open run with transcript export
  attack   one named adversarial strategy with expected-vs-empirical report
  params   security-parameter solver

All randomness derives from --seed (default 1), so identical invocations
produce byte-identical JSON apart from the generated_at timestamp, which
is excluded from the determinism contract.

Exit codes: 0 success, 2 usage/parameter error, 3 infeasible targets,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import adversary, optics, protocol, security
from .errors import (
    ContractViolationError,
    InfeasibleTargetError,
    ParameterError,
)
from .rng import DEFAULT_SEED, substream

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4

ATTACK_STRATEGIES = (
    "alice-intercept",
    "alice-intercept-resend",
    "alice-alter",
    "bob-bs",
    "bob-multiphoton",
    "bob-polarization",
)


def _report_envelope(command: str, config: dict, results: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "results": results,
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }


def _emit(report: dict, args, csv_rows=None, csv_header=None) -> None:
    if args.format == "csv":
        if csv_rows is None:
            raise ParameterError(
                f"command '{report['command']}' has no CSV representation"
            )
        out = open(args.out, "w", newline="") if args.out else sys.stdout
        try:
            writer = csv.writer(out)
            if csv_header:
                writer.writerow(csv_header)
            writer.writerows(csv_rows)
        finally:
            if args.out:
                out.close()
        return
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_table1(args) -> tuple[dict, list, list]:
    if args.trials < 1000:
        raise ParameterError("table1 needs at least 1000 trials")
    bs = optics.BeamSplitter(args.r, 1.0 - args.r)
    rng = substream(args.seed, 10)
    warnings = []
    if args.r in (0.0, 1.0):
        warnings.append("degenerate beam splitter: analytic columns only "
                        "partially testable")

    cases = {}
    rows = []
    all_pass = True
    for label, eq in (("a_eq_b", True), ("a_neq_b", False)):
        a_bit = 0
        b_bit = 0 if eq else 1
        analytic = optics.outcome_distribution(a_bit, b_bit, bs)
        counts = {d: 0 for d in optics.Detector}
        for _ in range(args.trials):
            counts[optics.run_slot(a_bit, b_bit, bs, rng).detector] += 1
        cells = {}
        for det in (optics.Detector.D0, optics.Detector.D1, optics.Detector.D2):
            p = analytic[det]
            freq = counts[det] / args.trials
            # 4-sigma binomial window; degenerate cells demand exactness.
            tol = 4.0 * math.sqrt(p * (1 - p) / args.trials)
            ok = abs(freq - p) <= tol
            all_pass &= ok
            cells[det.value] = {
                "analytic": p,
                "empirical": freq,
                "deviation": freq - p,
                "tolerance": tol,
                "pass": ok,
            }
            rows.append([label, det.value, p, freq, freq - p, tol, ok])
        cases[label] = cells
    results = {"cases": cases, "all_pass": all_pass, "warnings": warnings}
    header = ["case", "detector", "analytic", "empirical", "deviation",
              "tolerance", "pass"]
    return results, rows, header


def cmd_commit(args) -> tuple[dict, list, list]:
    params = protocol.CommitmentParams(
        m=args.m, n=args.n,
        bs=optics.BeamSplitter(args.r, 1.0 - args.r),
        master_seed=args.seed,
    )
    transcript = protocol.run_commit_phase(params, b=args.bit)
    opening = transcript.honest_opening()
    if args.open_bit is not None:
        opening.claimed_bit = args.open_bit
    verdict = protocol.bob_verify_opening(transcript, opening)
    if args.transcript:
        transcript.to_csv(args.transcript)
    results = {
        "summary": transcript.summary(),
        "verdict": {"accepted": verdict.accepted, "reason": verdict.reason},
        "committed_bit": int(transcript.alice.committed_bit),
    }
    rows = []
    for i in range(params.m):
        for j in range(params.n):
            detector, time_bin = transcript._slot_label(i, j)
            rows.append([i, j, int(transcript.alice.bits[i, j]),
                         int(transcript.bob.bits[i, j]), detector, time_bin])
    return results, rows, ["i", "j", "a", "b", "detector", "time_bin"]


def _attack_alice_alter(args, rng) -> dict:
    """Per-sequence alter success sampled by full commit/alter/verify
    loops; the m-sequence success probability is composed analytically
    (naive full-protocol sampling of a ~1e-6 event is hopeless)."""
    successes = 0
    for trial in range(args.trials):
        params = protocol.CommitmentParams(
            m=1, n=args.n, master_seed=int(rng.integers(0, 2**62))
        )
        transcript = protocol.run_commit_phase(params)
        target = 1 - int(transcript.alice.committed_bit)
        try:
            opening = adversary.alice_optimal_alter(transcript, target, rng)
        except adversary.AttackImpossibleError:
            continue
        if protocol.bob_verify_opening(transcript, opening).accepted:
            successes += 1
    per_seq = successes / args.trials
    probs = security.comparison_probs(optics.BeamSplitter.balanced())
    analytic_seq = float((1 - probs.p) / (1 - probs.q))
    return {
        "per_sequence_success": {"empirical": per_seq,
                                 "analytic": analytic_seq},
        "protocol_success_m_sequences": {
            "m": args.m,
            "empirical_composed": per_seq ** args.m,
            "analytic": analytic_seq ** args.m,
        },
        "trials": args.trials,
    }


def cmd_attack(args) -> tuple[dict, list, list]:
    params = protocol.CommitmentParams(
        m=args.m, n=args.n,
        bs=optics.BeamSplitter(args.r, 1.0 - args.r),
        master_seed=args.seed,
    )
    rng = substream(args.seed, 20)
    if args.strategy == "alice-intercept":
        report = adversary.alice_intercept(args.n0, params, rng,
                                           alter_trials=args.trials)
        results = report.to_dict()
    elif args.strategy == "alice-intercept-resend":
        report = adversary.alice_intercept_resend(args.n0, params, rng,
                                                  alter_trials=args.trials)
        results = report.to_dict()
    elif args.strategy == "alice-alter":
        results = _attack_alice_alter(args, rng)
    elif args.strategy == "bob-bs":
        report = adversary.bob_illegal_bs(args.t_prime, params, rng,
                                          runs=args.runs)
        results = report.to_dict()
    elif args.strategy == "bob-multiphoton":
        report = adversary.bob_multiphoton(args.k, params, rng,
                                           runs=args.runs)
        results = report.to_dict()
    elif args.strategy == "bob-polarization":
        pol = optics.PLUS
        report = adversary.bob_illegal_polarization(pol, params, rng,
                                                    runs=args.runs)
        results = report.to_dict()
    else:  # pragma: no cover - argparse choices guard this
        raise ParameterError(f"unknown strategy {args.strategy!r}")

    rows, header = None, None
    if "expected" in results and "empirical" in results:
        header = ["quantity", "expected", "empirical"]
        rows = [
            [key, results["expected"].get(key), results["empirical"].get(key)]
            for key in sorted(set(results["expected"]) | set(results["empirical"]))
        ]
    return results, rows, header


def cmd_params(args) -> tuple[dict, list, list]:
    result = security.choose_parameters(
        args.target_binding, args.target_concealing,
        optics.BeamSplitter(args.r, 1.0 - args.r),
        max_m=args.max_m, max_n=args.max_n,
    )
    report = security.security_report(
        result.m, result.n, optics.BeamSplitter(args.r, 1.0 - args.r)
    )
    results = {
        "chosen": {"m": result.m, "n": result.n},
        "report": report.to_dict(),
        "search_trace": result.to_dict()["trace"],
    }
    rows = [[p, v, a] for p, v, a in result.trace]
    return results, rows, ["parameter", "value", "advantage"]


# ---------------------------------------------------------------------------
# Parser / entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cqbc",
        description="Counterfactual bit-commitment simulator and analyzer",
    )
    parser.add_argument("--config", help="JSON config file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials_default):
        p.add_argument("--m", type=int, default=70)
        p.add_argument("--n", type=int, default=130)
        p.add_argument("--r", type=float, default=0.5,
                       help="beam splitter reflectivity (t = 1 - r)")
        p.add_argument("--trials", type=int, default=trials_default)
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--out", help="write the report to this path")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("table1", help="per-slot detector distributions")
    common(p, 100_000)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("commit", help="honest commit + open run")
    common(p, 0)
    p.add_argument("--bit", type=int, choices=(0, 1), default=None,
                   help="commitment bit (default: random)")
    p.add_argument("--open-bit", type=int, choices=(0, 1), default=None,
                   help="open with this bit instead of the committed one")
    p.add_argument("--transcript", help="also dump the slot-level CSV here")
    p.set_defaults(func=cmd_commit)

    p = sub.add_parser("attack", help="run one adversarial strategy")
    common(p, 10_000)
    p.add_argument("--strategy", required=True, choices=ATTACK_STRATEGIES)
    p.add_argument("--n0", type=int, default=0,
                   help="intercepted slots per sequence")
    p.add_argument("--k", type=int, default=2, help="photons per slot")
    p.add_argument("--t-prime", type=float, default=0.5, dest="t_prime",
                   help="transmissivity of Bob's illegal beam splitter")
    p.add_argument("--runs", type=int, default=1000,
                   help="independent commit runs for detection statistics")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("params", help="solve for (m, n)")
    common(p, 0)
    p.add_argument("--target-binding", type=float, required=True)
    p.add_argument("--target-concealing", type=float, required=True)
    p.add_argument("--max-m", type=int, default=100_000)
    p.add_argument("--max-n", type=int, default=1_000_000)
    p.set_defaults(func=cmd_params)

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    probe, _ = parser.parse_known_args(argv)
    if probe.config:
        with open(probe.config) as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise ParameterError("config file must hold a JSON object")
        parser.set_defaults(**config)
        # subcommand options carry their own defaults, which would shadow
        # the config values; push the config into every subparser as well
        for action in parser._actions:
            if isinstance(action, argparse._SubParsersAction):
                for sub in action.choices.values():
                    sub.set_defaults(**config)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        results, rows, header = args.func(args)
        config = {
            k: v for k, v in sorted(vars(args).items())
            if k not in ("func", "config") and not callable(v)
        }
        report = _report_envelope(args.command, config, results)
        _emit(report, args, csv_rows=rows, csv_header=header)
    except InfeasibleTargetError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ParameterError, ContractViolationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
