"""
Command line: reduce, solve, verify and explore.
Usage: python run.py <command> <kind> [options]
"""

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from .config.settings import settings
from .errors import InputError, LatforgeError
from .lattice import classify_maxlin, classify_promise_instance, dist_p, lambda1_p, solve_maxlin_exact
from .numerics.bounded import BoundedValue, format_decimal, to_fraction, working_precision
from .records.models import MaxLinInstance, NormSpec, ProblemKind, format_fraction
from .records.repository import get_artifact_store
from .reductions import build_bdd_query, maxlin_to_cvp, maxlin_to_svp, promise_holds
from .utils.logging_setup import configure_logging
from .utils.reporting import get_console_reporter

logger = logging.getLogger(__name__)

REDUCTIONS = ("maxlin-to-cvp", "maxlin-to-svp", "cvp-to-bdd")
SOLVE_KINDS = ("maxlin", "cvp", "svp", "bdd")
VERIFY_SUITES = ("theta-lemma", "gadget", "sparsification", "pipeline", "all")
EXPLORE_KINDS = ("conjecture", "alpha-dagger")
DEFAULT_ALPHA_DAGGER_P = "1,1.5,2,3,4,8,16"


def _fmt(v: Any) -> str:
    if isinstance(v, Fraction):
        return format_fraction(v)
    if isinstance(v, BoundedValue):
        return format_decimal(v.value, 20)
    return str(v)


def _vector(v: Sequence[Fraction]) -> str:
    return "(" + ", ".join(_fmt(x) for x in v) + ")"


def _grid(lo: str, hi: str, steps: int) -> List[Fraction]:
    """`steps` evenly spaced rationals from lo to hi (empty when steps is 0)"""
    lo_q, hi_q = to_fraction(lo), to_fraction(hi)
    if steps <= 0:
        return []
    if steps == 1:
        return [lo_q]
    return [lo_q + (hi_q - lo_q) * i / (steps - 1) for i in range(steps)]


def _path(value: str) -> Path:
    return Path(value).expanduser().resolve()


# ============================================================================
# reduce
# ============================================================================

def cmd_reduce(args: argparse.Namespace) -> int:
    store = get_artifact_store()
    console = get_console_reporter()
    command = ["reduce", args.kind, args.in_path, args.out_path]

    with store.run(command, seed=args.seed, toy=args.toy):
        if args.kind == "cvp-to-bdd":
            if args.alpha is None:
                raise InputError("cvp-to-bdd needs --alpha")
            cvp = store.load_payload(_path(args.in_path), ProblemKind.CVP)
            query, _, artifacts = build_bdd_query(
                cvp, args.alpha, seed=args.seed, toy=args.toy, dry_run=args.dry_run
            )
            if query is None:
                store.write_model(_path(args.out_path), artifacts)
            else:
                store.write_instance(_path(args.out_path), ProblemKind.BDD, query, artifacts, toy=args.toy)
            print(console.format_artifacts(artifacts))
            return 0

        inst = store.load_payload(_path(args.in_path), ProblemKind.MAXLIN)
        if args.epsilon is not None:
            inst = MaxLinInstance.model_validate({**inst.model_dump(), "epsilon": args.epsilon})

        if args.kind == "maxlin-to-cvp":
            cvp = maxlin_to_cvp(inst, NormSpec(p=args.p or 2))
            store.write_instance(_path(args.out_path), ProblemKind.CVP, cvp)
            print(f"CVP instance: rank {cvp.lattice.rank}, r^p = {_fmt(cvp.radius_pth_power)}, "
                  f"gamma^p = {_fmt(cvp.gamma_pth_power)}")
            return 0

        svp, artifacts = maxlin_to_svp(
            inst, NormSpec(p=args.p or 3), seed=args.seed, toy=args.toy, dry_run=args.dry_run
        )
        if svp is None:
            store.write_model(_path(args.out_path), artifacts)
        else:
            store.write_instance(_path(args.out_path), ProblemKind.SVP, svp, artifacts, toy=args.toy)
        print(console.format_artifacts(artifacts))
    return 0


# ============================================================================
# solve
# ============================================================================

def _solve_report(kind: str, path: Path) -> Dict[str, Any]:
    store = get_artifact_store()
    if kind == "maxlin":
        inst = store.load_payload(path, ProblemKind.MAXLIN)
        solution = solve_maxlin_exact(inst)
        return {
            "kind": kind,
            "class": classify_maxlin(inst, solution).value,
            "satisfied": solution.satisfied,
            "m": solution.m,
            "assignment": list(solution.assignment),
        }

    if kind == "cvp":
        inst = store.load_payload(path, ProblemKind.CVP)
        result = dist_p(inst.lattice, inst.norm, inst.target)
        return {
            "kind": kind,
            "class": classify_promise_instance(ProblemKind.CVP, inst).value,
            "distance_pth_power": _fmt(result.distance_pth_power),
            "witness": [_fmt(x) for x in result.witness],
        }

    if kind == "svp":
        if store.read_instance(path).kind is ProblemKind.LATTICE:
            lattice = store.load_payload(path, ProblemKind.LATTICE)
            result = lambda1_p(lattice, NormSpec(p=2))
            verdict = None
        else:
            inst = store.load_payload(path, ProblemKind.SVP)
            result = lambda1_p(inst.lattice, inst.norm)
            verdict = classify_promise_instance(ProblemKind.SVP, inst).value
        return {
            "kind": kind,
            "class": verdict,
            "lambda1_pth_power": _fmt(result.distance_pth_power),
            "witness": [_fmt(x) for x in result.witness],
        }

    query = store.load_payload(path, ProblemKind.BDD)
    result = dist_p(query.lattice, query.norm, query.target)
    return {
        "kind": kind,
        "promise_holds": promise_holds(query),
        "distance_pth_power": _fmt(result.distance_pth_power),
        "witness": [_fmt(x) for x in result.witness],
    }


def cmd_solve(args: argparse.Namespace) -> int:
    report = _solve_report(args.kind, _path(args.in_path))
    if args.json:
        print(json.dumps(report, indent=2))
        return 0

    witness = "(" + ", ".join(report.get("witness", [])) + ")"
    if args.kind == "maxlin":
        print(f"{report['class'].upper()}, OPT = {report['satisfied']}/{report['m']}, "
              f"assignment {tuple(report['assignment'])}")
    elif args.kind == "cvp":
        print(f"{report['class'].upper()}, dist^p = {report['distance_pth_power']}, witness {witness}")
    elif args.kind == "svp":
        prefix = f"{report['class'].upper()}, " if report["class"] else ""
        print(f"{prefix}lambda1^p = {report['lambda1_pth_power']}, witness {witness}")
    else:
        print(f"closest vector {witness}, dist^p = {report['distance_pth_power']}")
        if not report["promise_holds"]:
            print("note: promise-violated (dist > alpha * lambda1)")
    return 0


# ============================================================================
# verify / explore
# ============================================================================

def cmd_verify(args: argparse.Namespace) -> int:
    from .orchestrator import SuiteRunner

    stats = SuiteRunner().run(
        args.suite,
        trials=args.trials,
        primes=[args.q] if args.q else None,
        n_max=args.n_max,
        m_max=args.m_max,
        instances=args.instances,
        seed=args.seed,
    )
    if not stats.all_passed:
        first = stats.failures[0] if stats.failures else "no checks ran"
        print(f"verification failed: {first}", file=sys.stderr)
        return 1
    return 0


def cmd_explore(args: argparse.Namespace) -> int:
    from .verifier import alpha_dagger_table, explore_conjecture

    if args.kind == "conjecture":
        frame = explore_conjecture(
            _grid(args.p_min, args.p_max, args.p_steps),
            _grid(args.tau_min, args.tau_max, args.tau_steps),
        )
    else:
        values = [v for v in args.p_values.split(",") if v.strip()]
        frame = alpha_dagger_table(to_fraction(v.strip()) for v in values)

    if args.csv:
        path = get_artifact_store().write_table(_path(args.csv), frame)
        print(f"Wrote {len(frame)} rows to {path}")
    else:
        print(frame.to_csv(index=False), end="")
    return 0


# ============================================================================
# Parser
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latforge",
        description="Lattice hardness reductions with certified numeric checks.",
    )
    parser.add_argument("--precision", type=int, default=None, help="Working precision in decimal digits.")
    parser.add_argument("--log-level", default=None, dest="log_level", help="Logging level (default from settings).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", help="Run a reduction on an instance file.")
    p.add_argument("kind", choices=REDUCTIONS)
    p.add_argument("in_path")
    p.add_argument("out_path")
    p.add_argument("--p", type=to_fraction, default=None, help="l_p norm exponent.")
    p.add_argument("--epsilon", type=to_fraction, default=None, help="MAXLIN gap parameter.")
    p.add_argument("--alpha", type=to_fraction, default=None, help="BDD decoding radius factor.")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--toy", action="store_true", help="Undersized gadget; output is watermarked as non-sound.")
    p.add_argument("--dry-run", action="store_true", dest="dry_run", help="Compute parameters only.")
    p.add_argument("--precision", type=int, default=argparse.SUPPRESS, help="Working precision in decimal digits.")
    p.set_defaults(handler=cmd_reduce)

    p = sub.add_parser("solve", help="Solve a desk-scale instance exactly.")
    p.add_argument("kind", choices=SOLVE_KINDS)
    p.add_argument("in_path")
    p.add_argument("--json", action="store_true", help="Machine-readable output.")
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("verify", help="Run acceptance suites.")
    p.add_argument("suite", choices=VERIFY_SUITES)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--q", type=int, default=None, help="Sparsification prime.")
    p.add_argument("--n-max", type=int, default=4, dest="n_max")
    p.add_argument("--m-max", type=int, default=6, dest="m_max")
    p.add_argument("--instances", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("explore", help="Tabulate theta and alpha-dagger values.")
    p.add_argument("kind", choices=EXPLORE_KINDS)
    p.add_argument("--p-min", default="2", dest="p_min")
    p.add_argument("--p-max", default="2.2", dest="p_max")
    p.add_argument("--p-steps", type=int, default=11, dest="p_steps")
    p.add_argument("--tau-min", default="0.1", dest="tau_min")
    p.add_argument("--tau-max", default="3", dest="tau_max")
    p.add_argument("--tau-steps", type=int, default=30, dest="tau_steps")
    p.add_argument("--p-values", default=DEFAULT_ALPHA_DAGGER_P, dest="p_values")
    p.add_argument("--csv", default=None, help="Write the table here instead of stdout.")
    p.set_defaults(handler=cmd_explore)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, dispatch, and map library errors to exit codes."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    if args.precision is not None:
        settings.precision.digits = args.precision
    try:
        with working_precision(settings.precision.digits):
            return args.handler(args)
    except LatforgeError as e:
        logger.debug(f"{type(e).__name__} details: {e.details}")
        print(str(e), file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        print(f"schema-error: {e}", file=sys.stderr)
        return 2
