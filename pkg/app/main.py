"""
Ponto de entrada da CLI do motor.

    python -m app.main <comando> --config <arquivo.json> --out <saída> [--format csv|json]

Códigos de saída: 0 sucesso, 2 erro de validação, 3 falha do solver.
"""

import argparse
import sys
from pathlib import Path

import pandas as pd
from dotenv import load_dotenv

from app.config.errors import SolverError, ValidationError
from app.config.settings import load_settings
from app.governance.logging import RunContext, setup_logging
from app.orchestration.commands import COMMANDS, CommandResult

load_dotenv()

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3


def write_table(table: pd.DataFrame, path: Path, fmt: str) -> None:
    """Escreve a tabela em CSV ou JSON (registros), com saída determinística."""
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        table.to_json(path, orient="records", indent=2, double_precision=15)
    else:
        table.to_csv(path, index=False, float_format="%.10g")


def write_result(result: CommandResult, out: Path, fmt: str) -> list[Path]:
    """Tabela principal em out; auxiliares em <stem>_<nome>.<ext> ao lado."""
    written = [out]
    write_table(result.table, out, fmt)
    for name, table in result.extras.items():
        extra = out.with_name(f"{out.stem}_{name}{out.suffix}")
        write_table(table, extra, fmt)
        written.append(extra)
    return written


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m app.main",
        description="Motor de diferenças finitas Heston/LSV com esquemas forward e backward consistentes",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Exemplos:
  python -m app.main price --config configs/heston_table.json --out out/price.csv
  python -m app.main density --config configs/heston_table.json --out out/density.csv
  python -m app.main theta_sweep --config configs/heston_table.json --out out/sweep.json --format json
  python -m app.main consistency_check --config configs/consistency_toy.json --out out/check.csv
        """,
    )
    parser.add_argument("command", choices=sorted(COMMANDS), help="Comando a executar")
    parser.add_argument("--config", type=Path, required=True, help="Arquivo de configuração JSON")
    parser.add_argument("--out", type=Path, required=True, help="Arquivo de saída")
    parser.add_argument(
        "--format",
        choices=("csv", "json"),
        default="csv",
        help="Formato da saída (default: csv)",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging()
    context = RunContext(args.command)

    try:
        settings = load_settings(args.config)
        result = COMMANDS[args.command](settings, context)
        written = write_result(result, args.out, args.format)
    except ValidationError as e:
        context.log_error(str(e), {"command": args.command})
        print(f"erro de validação: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolverError as e:
        context.log_error(str(e), {"command": args.command})
        print(f"falha do solver: {e}", file=sys.stderr)
        return EXIT_SOLVER

    summary = context.get_events_summary()
    print(
        f"{args.command} concluído em {summary['duration_seconds']:.2f}s "
        f"[{context.run_id}] -> {', '.join(str(p) for p in written)}",
        file=sys.stderr,
    )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
