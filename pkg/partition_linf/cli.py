"""
Command-line entry point.

    python -m partition_linf.cli validate corpus/abelian_f2.json
    python -m partition_linf.cli mc corpus/nilpotent_f2.json --pi0 --witnesses
    python -m partition_linf.cli generate cobar-point --W 2 --out corpus/cobar_point_W2.json
    python -m partition_linf.cli operad dsquared --max-arity 3 --max-degree 2

Exit codes: 0 pass, 1 property failure, 2 usage or parse error, 3 cap exceeded.
"""

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

from rich import print as rprint

from shared_utils import (
    setup_logging,
    write_json,
    get_insertion_range,
    DEFAULT_CAP,
    DEFAULT_MAX_LEAVES,
    DEFAULT_P,
    DEFAULT_SEED,
    DEFAULT_W,
    REPORT_SCHEMA,
)
from partition_linf.errors import CapExceededError, PartitionLinfError, PresentationError, ShapeError
from partition_linf.scalars import PrimeField
from partition_linf import barratt_eccles as be
from partition_linf.algebra import GradedModule, TruncatedAlgebra, element_to_json, validate
from partition_linf.free_cobar import build_free, check_d_squared, cobar_interval, cobar_point
from partition_linf.mc import enumerate_mc, pi0

logger = setup_logging("PartitionLinfCLI")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3

# ========================= CONFIGURATION =========================

@dataclass(frozen=True)
class RunConfig:
    p: int = DEFAULT_P
    W: int = DEFAULT_W
    max_leaves: int = DEFAULT_MAX_LEAVES
    cap: int = DEFAULT_CAP
    seed: int = DEFAULT_SEED
    mode: Optional[str] = None
    out: Optional[Path] = None
    fmt: str = "json"
    quiet: bool = True

    def __post_init__(self):
        PrimeField(self.p)
        if self.W < 0:
            raise ShapeError(f"--W must be non-negative, got {self.W}")
        if self.cap < 1 or self.max_leaves < 1:
            raise ShapeError("--cap and --max-leaves must be at least 1")
        if self.mode is None:
            object.__setattr__(self, "mode", get_insertion_range())
        if self.mode not in ("full", "displayed"):
            raise ShapeError(f"unknown insertion range '{self.mode}'")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        return cls(
            p=args.p, W=args.W, max_leaves=args.max_leaves, cap=args.cap, seed=args.seed,
            mode=args.insertion_range, out=Path(args.out) if args.out else None,
            fmt=args.format, quiet=not args.progress,
        )


# ========================= HELPERS =========================

def load_algebra(path: str) -> TruncatedAlgebra:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        logger.error(f"Cannot read {path}: {e}")
        raise PresentationError(f"cannot read {path}: {e.strerror}") from e
    return TruncatedAlgebra.from_text(text)


def _parse_generators(text: str) -> GradedModule:
    """'x:0,y:1' -> basis (x, 0), (y, 1)."""
    basis = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, _, degree = item.partition(":")
        if not name or not degree.lstrip("-").isdigit():
            raise ShapeError(f"generator '{item}' must read name:degree")
        basis.append((name, int(degree)))
    return GradedModule(tuple(basis))


def _parse_differential(pairs: Sequence[str]) -> dict:
    """Each 'x>y' adds d(x) = y."""
    d = {}
    for pair in pairs or []:
        source, _, target = pair.partition(">")
        if not source or not target:
            raise ShapeError(f"differential term '{pair}' must read source>target")
        d.setdefault(source, {})[target] = 1
    return d


def emit(payload: dict, config: RunConfig, summary: List[str]) -> None:
    payload = {"schema": REPORT_SCHEMA, "seed": config.seed, **payload}
    if config.out is not None:
        write_json(config.out, payload)
    if config.fmt == "text":
        for line in summary:
            rprint(line)
    elif config.out is None:
        print(json.dumps(payload, indent=2, sort_keys=True))


def _status_line(passed: bool, what: str) -> str:
    return f"[green]✔ PASS[/green] {what}" if passed else f"[bold red]✘ FAIL[/bold red] {what}"


# ========================= COMMANDS =========================

def cmd_validate(args: argparse.Namespace, config: RunConfig) -> int:
    alg = load_algebra(args.file)
    report = validate(alg, args.max_arity, config.mode, config.cap, config.quiet)
    summary = [_status_line(report.passed, args.file)]
    for v in report.violations[:10]:
        summary.append(f"  [red]{v['check']}[/red]: {v['identity']} {json.dumps(v['witness'], sort_keys=True)}")
    emit({"command": "validate", "file": Path(args.file).name, **report.to_json()}, config, summary)
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_mc(args: argparse.Namespace, config: RunConfig) -> int:
    alg = load_algebra(args.file)
    if args.pi0 or args.witnesses:
        result = pi0(alg, config.cap, config.quiet)
        payload = result.to_json(with_witnesses=args.witnesses)
        summary = [f"[green]{len(result.mc)}[/green] Maurer-Cartan elements in "
                   f"[green]{len(result.classes)}[/green] gauge classes"]
        if not (result.raw_symmetric and result.raw_transitive):
            summary.append("[yellow]witnessed relation needed closing up[/yellow]")
    else:
        mc = enumerate_mc(alg, config.cap, config.quiet)
        payload = {"mc": [element_to_json(a) for a in mc]}
        summary = [f"[green]{len(mc)}[/green] Maurer-Cartan elements"]
    emit({"command": "mc", "file": Path(args.file).name, **payload}, config, summary)
    return EXIT_PASS


def cmd_generate(args: argparse.Namespace, config: RunConfig) -> int:
    if args.kind == "free":
        fa = build_free(_parse_generators(args.generators), config.W, config.p, config.max_leaves,
                        _parse_differential(args.differential), args.curved, config.mode, config.cap, config.quiet)
    elif args.kind == "cobar-point":
        fa = cobar_point(config.W, config.max_leaves, config.p, config.mode, config.cap, config.quiet)
    else:
        fa = cobar_interval(config.W, config.max_leaves, config.p, config.mode, config.cap, config.quiet)
    payload = fa.export().to_json()
    failures = check_d_squared(fa)
    if failures:
        logger.warning(f"Generated {args.kind} algebra has {len(failures)} d^2 residues")
    if config.out is not None:
        write_json(config.out, payload)
    elif config.fmt == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    if config.fmt == "text":
        rprint(f"{args.kind}: [green]{len(fa.carrier)}[/green] basis trees, W = {config.W}")
        rprint(_status_line(not failures, "d^2 against the curvature bracket"))
    return EXIT_PASS


def _epsilon_table(max_arity: int, max_degree: int, p: int) -> List[dict]:
    field_p = PrimeField(p)
    rows = []
    for n in range(1, max_arity + 1):
        for r in range(max_degree + 1):
            for w in be.all_tuples(n, r):
                for s in range(1, r + 2):
                    rows.append({"tuple": w.to_json(), "s": s, "epsilon": int(be.epsilon_s(w, s, field_p))})
    return rows


def cmd_operad(args: argparse.Namespace, config: RunConfig) -> int:
    n, r, p = args.max_arity, args.max_degree, config.p
    if args.check == "epsilon":
        rows = _epsilon_table(n, r, p)
        emit({"command": "operad", "check": "epsilon", "p": p, "table": rows}, config,
             [f"epsilon table: [green]{len(rows)}[/green] entries"])
        return EXIT_PASS
    if args.check == "duality":
        failures = [{"x": x.to_json(), "y": y.to_json(), "i": i, "z": z.to_json()}
                    for x, y, i, z in be.check_duality(n, r, p)]
    elif args.check == "dsquared":
        failures = [{"tuple": w.to_json()} for w in be.check_d_squared(n, r, p, config.mode)]
    elif args.check == "adjointness":
        failures = [{"x": x.to_json(), "y": y.to_json()} for x, y in be.check_adjointness(n, r, p, config.mode)]
    else:
        failures = [{"tuple": w.to_json(), "n": a, "k": k, "i": i}
                    for w, a, k, i in be.check_coleibniz(n, r, p, config.mode)]
    passed = not failures
    emit(
        {"command": "operad", "check": args.check, "p": p, "max_arity": n, "max_degree": r,
         "mode": config.mode, "status": "PASS" if passed else "FAIL", "failures": failures},
        config,
        [_status_line(passed, f"{args.check} (n <= {n}, r <= {r}, p = {p})")],
    )
    return EXIT_PASS if passed else EXIT_FAIL


# ========================= PARSER =========================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=DEFAULT_P, help="Prime characteristic")
    common.add_argument("--W", type=int, default=DEFAULT_W, help="Truncation degree")
    common.add_argument("--max-leaves", dest="max_leaves", type=int, default=DEFAULT_MAX_LEAVES,
                        help="Leaf budget for free and cobar carriers")
    common.add_argument("--cap", type=int, default=DEFAULT_CAP, help="Enumeration limit")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help="Copied into the report envelope only; every search is exhaustive")
    common.add_argument("--insertion-range", dest="insertion_range", choices=["full", "displayed"],
                        help="Spots used by the dual differential")
    common.add_argument("--out", type=str, help="Write the JSON result to this path")
    common.add_argument("--format", choices=["json", "text"], default="json", help="Output format")
    common.add_argument("--progress", action="store_true", help="Show tqdm progress bars")

    parser = argparse.ArgumentParser(description="Curved partition L-infinity algebras over F_p")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", parents=[common], help="Check a presentation")
    p_validate.add_argument("file")
    p_validate.add_argument("--max-arity", dest="max_arity", type=int, help="Largest relation arity to check")
    p_validate.set_defaults(handler=cmd_validate)

    p_mc = sub.add_parser("mc", parents=[common], help="Maurer-Cartan elements and gauge classes")
    p_mc.add_argument("file")
    p_mc.add_argument("--pi0", action="store_true", help="Group MC elements into gauge classes")
    p_mc.add_argument("--witnesses", action="store_true", help="List the gauge witnesses found")
    p_mc.set_defaults(handler=cmd_mc)

    p_gen = sub.add_parser("generate", parents=[common], help="Emit a free or cobar presentation")
    p_gen.add_argument("kind", choices=["free", "cobar-point", "cobar-interval"])
    p_gen.add_argument("--generators", default="", help="Comma-separated name:degree list")
    p_gen.add_argument("--differential", nargs="*", help="Terms source>target of the generator differential")
    p_gen.add_argument("--curved", action="store_true", help="Allow corks in a free algebra")
    p_gen.set_defaults(handler=cmd_generate)

    p_op = sub.add_parser("operad", parents=[common], help="Exhaustive Barratt-Eccles checks")
    p_op.add_argument("check", choices=["duality", "dsquared", "adjointness", "coleibniz", "epsilon"])
    p_op.add_argument("--max-arity", dest="max_arity", type=int, default=3)
    p_op.add_argument("--max-degree", dest="max_degree", type=int, default=2)
    p_op.set_defaults(handler=cmd_operad)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.from_args(args)
        return args.handler(args, config)
    except CapExceededError as e:
        logger.error(str(e))
        rprint(f"[bold red]✘ CAP[/bold red] {e}")
        return EXIT_CAP
    except (PartitionLinfError, ValueError) as e:
        logger.error(str(e))
        rprint(f"[bold red]✘ ERROR[/bold red] {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
