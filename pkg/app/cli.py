"""Command-line entry point: ``python -m app.cli <command> ...``

Exit status 0 on success, otherwise the ``exit_code`` of the domain error:
1 invalid input, 2 window failure, 3 internal assertion.
"""
from typing import Any, List, Optional, Sequence
import argparse
import json
import logging
import sys

from app.algebra.dg_module import s_module_from_dict
from app.algebra.equivariant import BUILTIN_NAMES, builtin, parse_complex
from app.algebra.errors import AlgebraError, SchemaError
from app.algebra.operad import RULES
from app.config import settings
from app.services.model_service import ModelService, model_to_dict, render_model
from app.services.operad_service import OPERADS, OperadService, render_basis, render_koszul
from app.services.rank_service import FAMILIES, WINDOW_FAILURE, RankService, render_reports

logger = logging.getLogger(__name__)


def _load_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path} is not valid JSON: {e}")
    except OSError as e:
        raise SchemaError(f"cannot read {path}: {e}")


def _lambda_source(args: argparse.Namespace):
    if args.builtin:
        return builtin(args.builtin, args.rank, args.dim)
    if args.complex:
        return parse_complex(_load_json(args.complex))
    if getattr(args, "module", None):
        return _load_json(args.module)
    raise SchemaError("give --complex FILE, --module FILE or --builtin NAME")


def _emit(args: argparse.Namespace, payload: Any, text: Optional[str] = None) -> None:
    if args.format == "text" and text is not None:
        print(text)
    else:
        print(json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False))


def _table(title: str, dims: dict) -> str:
    lines = [title] + [f"  H_{n:<4} {v}" for n, v in dims.items()]
    return "\n".join(lines)


def cmd_homology(args: argparse.Namespace) -> int:
    service = ModelService()
    if args.module:
        report = service.homology(_load_json(args.module), args.window)
        _emit(args, report, _table(f"H(M), window {report['window']}", report["dims"]))
    else:
        report = service.lambda_homology(_lambda_source(args))
        _emit(args, report, _table("H(C)", report["dims"]))
    return 0


def cmd_hirsch_brown(args: argparse.Namespace) -> int:
    service = ModelService()
    source = _lambda_source(args)
    model, comparison = service.hirsch_brown(source, args.window)
    payload = model_to_dict(model, comparison)
    if args.products:
        if isinstance(source, dict):
            source = parse_complex(source)
        payload["products"] = service.products(source)
    _emit(args, payload, render_model(model))
    return 0 if comparison.agree else 3


def cmd_carlsson(args: argparse.Namespace) -> int:
    if not args.module:
        raise SchemaError("carlsson needs --module FILE")
    model, comparison = ModelService().carlsson(_load_json(args.module), args.window)
    _emit(args, model_to_dict(model, comparison), render_model(model))
    return 0 if comparison.agree else 3


def _verdict_exit(rows: Sequence[dict]) -> int:
    """Window failures exit like WindowTooSmallError; the report is still printed"""
    return 2 if any(row["verdict"] == WINDOW_FAILURE for row in rows) else 0


def cmd_rank_check(args: argparse.Namespace) -> int:
    service = RankService()
    if args.random:
        if len(args.random) not in (2, 3):
            raise SchemaError("--random takes R M [SEED]")
        r, m = args.random[0], args.random[1]
        seed = args.random[2] if len(args.random) == 3 else args.seed
        if args.count > 1:
            reports = service.batch(range(seed, seed + args.count), r, m, args.family, args.jobs)
            _emit(args, reports, render_reports(reports))
            return _verdict_exit(reports)
        report = service.check_random(r, m, seed, args.window, args.family)
    elif args.module:
        report = service.check(s_module_from_dict(_load_json(args.module)), args.window)
    else:
        raise SchemaError("rank-check needs --module FILE or --random R M [SEED]")
    _emit(args, report.to_dict(), render_reports([report]))
    return _verdict_exit([report.to_dict()])


def cmd_operad_basis(args: argparse.Namespace) -> int:
    table = OperadService().basis(args.n, args.r)
    _emit(args, table, render_basis(table))
    return 0 if table["matches_rewriting"] else 3


def cmd_operad_koszul(args: argparse.Namespace) -> int:
    table = OperadService().koszul_table(args.n, args.a, args.r, args.operad)
    _emit(args, table, render_koszul(table))
    return 0


def cmd_euler(args: argparse.Namespace) -> int:
    report = ModelService().euler(_lambda_source(args))
    text = "\n".join(f"{k}: {v}" for k, v in report.items())
    _emit(args, report, text)
    return 0 if report["identity_holds"] else 3


def cmd_pbw(args: argparse.Namespace) -> int:
    report = OperadService().pbw(args.n, args.r, args.without)
    text = f"PBW n={args.n} r={args.r}: {'passed' if report['passed'] else 'failed'} " \
           f"({report['pairs_checked']} composites, {report['failure_count']} failures)"
    _emit(args, report, text)
    return 0 if report["passed"] else 3


def cmd_serve(args: argparse.Namespace) -> int:
    from app.main import serve
    serve()
    return 0


def _add_source_flags(p: argparse.ArgumentParser, module_help: str) -> None:
    p.add_argument("--complex", help="complex JSON file")
    p.add_argument("--module", help=module_help)
    p.add_argument("--builtin", choices=BUILTIN_NAMES, help="builtin complex")
    p.add_argument("--dim", type=int, default=1, help="sphere dimension for --builtin sphere")
    p.add_argument("--rank", type=int, default=1, help="group rank r for --builtin")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json", help="JSON output (default)")
    fmt.add_argument("--text", dest="format", action="store_const", const="text", help="text tables")
    common.add_argument("--window", nargs=2, type=int, metavar=("LO", "HI"), help="degree window")
    common.add_argument("--seed", type=int, default=0, help="random seed")
    common.add_argument("--jobs", type=int, default=settings.batch_jobs, help="worker processes for batches")
    common.set_defaults(format="json")

    parser = argparse.ArgumentParser(prog="gf2-homology", description="Homological algebra over F2")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("homology", parents=[common], help="homology of a module or complex")
    _add_source_flags(p, "S-module JSON file")
    p.set_defaults(func=cmd_homology)

    p = sub.add_parser("hirsch-brown", parents=[common], help="minimal Hirsch-Brown model")
    _add_source_flags(p, "Λ-module JSON file")
    p.add_argument("--products", action="store_true", help="also transfer products (simplicial complexes)")
    p.set_defaults(func=cmd_hirsch_brown)

    p = sub.add_parser("carlsson", parents=[common], help="Carlsson minimal model")
    p.add_argument("--module", help="S-module JSON file")
    p.set_defaults(func=cmd_carlsson)

    p = sub.add_parser("rank-check", parents=[common], help="rank_S M against 2^r")
    p.add_argument("--module", help="S-module JSON file")
    p.add_argument("--random", nargs="+", type=int, metavar="N", help="R M [SEED]")
    p.add_argument("--count", type=int, default=1, help="number of consecutive seeds")
    p.add_argument("--family", choices=FAMILIES, default="semifree", help="instance family")
    p.set_defaults(func=cmd_rank_check)

    p = sub.add_parser("operad-basis", parents=[common], help="path-sequence basis of W~(n)")
    p.add_argument("n", type=int)
    p.add_argument("r", type=int)
    p.set_defaults(func=cmd_operad_basis)

    p = sub.add_parser("operad-koszul", parents=[common], help="bar homology table")
    p.add_argument("n", type=int, help="largest weight")
    p.add_argument("a", type=int, help="largest arity")
    p.add_argument("r", type=int)
    p.add_argument("--operad", choices=OPERADS, default="wtilde")
    p.set_defaults(func=cmd_operad_koszul)

    p = sub.add_parser("euler", parents=[common], help="Euler characteristic identity")
    _add_source_flags(p, "Λ-module JSON file")
    p.set_defaults(func=cmd_euler)

    p = sub.add_parser("pbw", parents=[common], help="PBW certificate for W~")
    p.add_argument("n", type=int)
    p.add_argument("r", type=int)
    p.add_argument("--without", choices=RULES, help="drop one rewriting rule")
    p.set_defaults(func=cmd_pbw)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP API")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, settings.log_level),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AlgebraError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(json.dumps({"error": type(e).__name__, "detail": str(e), "exit_code": e.exit_code}), file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
