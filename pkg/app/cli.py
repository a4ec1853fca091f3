"""
DCLED - Command Line Interface

Usage:
    dcled keygen --scheme 2V --out key.json
    dcled serve --index 1 --port 7401 --data-dir ./data/s1
    dcled encrypt-upload --key key.json --data rows.csv --servers 127.0.0.1:7401 127.0.0.1:7402
    dcled delegate --key key.json --program prog.json --servers 127.0.0.1:7401 127.0.0.1:7402
    dcled oracle --data rows.csv --program prog.json
    dcled bench --sizes 10,50,100,500,1000 --out bench.csv
    dcled game --trials 100000
    dcled queue-sim --t 10 100 1000 --n 500

Exit codes: 0 ok, 1 other failure, 2 usage, 3 transport, 4 REJECT, 5 I/O or storage.
"""

import argparse
import asyncio
import logging
import sys
from pathlib import Path

from app.api.client import DelegationClient, Endpoint
from app.core.config import Settings, get_settings
from app.core.exceptions import DelegationError, ParameterError, StorageError, TransportError
from app.core.field import FieldElement, SchemeParams
from app.core.prf import PrfKey
from app.core.security import generate_key, load_key_file, save_key_file
from app.main import configure_logging, run_daemon
from app.models.program import MonomialProgram, QuadraticProgram
from app.models.store_record import SchemeTag
from app.services.bench_service import (
    BENCH_SCHEMES,
    BenchmarkHarness,
    QueueSimulator,
    write_queue_csv,
    write_report_csv,
    write_report_file,
)
from app.services.dataset_service import evaluate_plain, load_program, load_rows
from app.services.game_service import ForgeryGame
from app.services.scheme2s_service import SecretKey2S
from app.services.scheme2v_service import Reject, SecretKey2V
from app.services.schemeds_service import MultiServerKeyV

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_TRANSPORT = 3
EXIT_REJECT = 4
EXIT_IO = 5


class UsageError(Exception):
    """Arguments that parse but do not make sense together."""


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated int list") from exc


def _params(args: argparse.Namespace, settings: Settings) -> SchemeParams:
    if getattr(args, "modulus", None):
        return SchemeParams.create(int(args.modulus, 0), args.security_lambda)
    if getattr(args, "security_lambda", None):
        return SchemeParams.for_lambda(args.security_lambda)
    return settings.scheme_params


def _client(
    args: argparse.Namespace, params: SchemeParams, settings: Settings
) -> DelegationClient:
    endpoints = [Endpoint.parse(text) for text in args.servers]
    return DelegationClient(
        endpoints,
        params,
        timeout=args.timeout if args.timeout is not None else settings.client_timeout_seconds,
        retries=args.retries if args.retries is not None else settings.client_retries,
    )


# =============================================================================
# Commands
# =============================================================================


def cmd_keygen(args: argparse.Namespace, settings: Settings) -> int:
    scheme = SchemeTag(args.scheme)
    if scheme is SchemeTag.MULTI_SERVER_VERIFIABLE and not args.servers_count:
        raise UsageError("--servers-count is required for DV keys")
    params = _params(args, settings)
    key = generate_key(scheme, params, args.servers_count)
    save_key_file(args.out, key, params)
    print(f"wrote {scheme.value} key to {args.out}")
    return EXIT_OK


def cmd_encrypt_upload(args: argparse.Namespace, settings: Settings) -> int:
    scheme, key, params = load_key_file(args.key)
    rows = load_rows(args.data, params)
    client = _client(args, params, settings)
    if not scheme.two_server and len(client.endpoints) > settings.max_servers:
        raise UsageError(
            f"{len(client.endpoints)} servers exceed the limit of {settings.max_servers}"
        )

    if isinstance(key, SecretKey2S):
        count = asyncio.run(client.upload_2s(key, rows))
    elif isinstance(key, SecretKey2V):
        count = asyncio.run(client.upload_2v(key, rows))
    elif isinstance(key, MultiServerKeyV):
        if len(client.endpoints) < key.d:
            raise UsageError(f"DV key needs {key.d} servers")
        count = asyncio.run(client.upload_dv(key, rows))
    else:
        count = asyncio.run(client.upload_ds(key, rows, len(client.endpoints)))
    print(f"uploaded {len(rows)} rows ({count} {scheme.value} shares)")
    return EXIT_OK


def cmd_delegate(args: argparse.Namespace, settings: Settings) -> int:
    scheme, key, params = load_key_file(args.key)
    prog = load_program(args.program, params)
    client = _client(args, params, settings)

    result: FieldElement | Reject
    if scheme.two_server:
        if not isinstance(prog, QuadraticProgram):
            raise UsageError("two-server keys delegate quadratic programs")
        if isinstance(key, SecretKey2S):
            result = asyncio.run(client.delegate_2s(key, prog))
        else:
            assert isinstance(key, SecretKey2V)
            result = asyncio.run(client.delegate_2v(key, prog))
    else:
        if not isinstance(prog, MonomialProgram):
            raise UsageError("d-server keys delegate monomial programs")
        if isinstance(key, MultiServerKeyV):
            result = asyncio.run(client.delegate_dv(key, prog))
        else:
            assert isinstance(key, PrfKey)
            result = asyncio.run(client.delegate_ds(key, prog))

    if isinstance(result, Reject):
        print(f"REJECT {result.reason}")
        return EXIT_REJECT
    print(int(result))
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace, settings: Settings) -> int:
    params = _params(args, settings)
    rows = load_rows(args.data, params)
    prog = load_program(args.program, params)
    print(int(evaluate_plain(prog, rows)))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace, settings: Settings) -> int:
    overrides = {
        key: value
        for key, value in (
            ("host", args.host),
            ("port", args.port),
            ("server_index", args.index),
            ("data_dir", args.data_dir),
        )
        if value is not None
    }
    asyncio.run(run_daemon(settings.model_copy(update=overrides)))
    return EXIT_OK


def cmd_bench(args: argparse.Namespace, settings: Settings) -> int:
    harness = BenchmarkHarness(
        _params(args, settings),
        repetitions=args.repetitions or settings.bench_repetitions,
        seed=args.seed if args.seed is not None else settings.bench_seed,
    )
    schemes = [SchemeTag(s) for s in args.schemes.split(",")] if args.schemes else BENCH_SCHEMES
    report = harness.run(args.sizes, schemes)
    if args.out:
        write_report_file(report, args.out)
    else:
        write_report_csv(report, sys.stdout)
    for scheme, r2 in report.dec_fit_r2.items():
        logger.info(f"{scheme} dec time vs program terms: linear fit R^2 = {r2:.4f}")
    return EXIT_OK if all(row.correct for row in report.rows) else EXIT_FAILURE


def cmd_game(args: argparse.Namespace, settings: Settings) -> int:
    game = ForgeryGame(
        _params(args, settings),
        seed=args.seed if args.seed is not None else settings.bench_seed,
        queries=args.queries,
    )
    report = game.run(args.trials or settings.game_trials)
    print(report.model_dump_json(indent=2))
    return EXIT_OK if report.acceptances == 0 else EXIT_FAILURE


def cmd_queue_sim(args: argparse.Namespace, settings: Settings) -> int:
    sim = QueueSimulator(
        _params(args, settings), seed=args.seed if args.seed is not None else settings.bench_seed
    )
    scheme = SchemeTag(args.scheme)
    if args.mode == "executed":
        reports = [asyncio.run(sim.executed(t, args.n, scheme)) for t in args.t]
    else:
        service = sim.analytic(1, args.n, scheme, settings.bench_repetitions).service_seconds
        reports = [sim.analytic(t, args.n, scheme, service_seconds=service) for t in args.t]
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_queue_csv(reports, fh)
    else:
        write_queue_csv(reports, sys.stdout)
    return EXIT_OK


# =============================================================================
# Parser
# =============================================================================


def _add_field_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="security_lambda", type=int, default=None)
    parser.add_argument("--modulus", default=None, help="prime modulus, decimal or 0x-hex")


def _add_client_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--servers", nargs="+", required=True, metavar="HOST:PORT")
    parser.add_argument("--timeout", type=float, default=None, help="per-server seconds")
    parser.add_argument(
        "--retries", type=int, default=None, help="retry transport failures this many times"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcled", description="Delegated computation on label-encrypted data"
    )
    parser.add_argument("--log-level", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate a secret key file")
    p.add_argument("--scheme", choices=[t.value for t in SchemeTag], required=True)
    p.add_argument("--servers-count", type=int, default=None, help="d, for DV keys")
    p.add_argument("--out", type=Path, required=True)
    _add_field_flags(p)
    p.set_defaults(handler=cmd_keygen)

    p = sub.add_parser("encrypt-upload", help="encrypt CSV/JSONL rows and store the shares")
    p.add_argument("--key", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True)
    _add_client_flags(p)
    p.set_defaults(handler=cmd_encrypt_upload)

    p = sub.add_parser("delegate", help="evaluate a program file on the servers")
    p.add_argument("--key", type=Path, required=True)
    p.add_argument("--program", type=Path, required=True)
    _add_client_flags(p)
    p.set_defaults(handler=cmd_delegate)

    p = sub.add_parser("oracle", help="evaluate a program file on plaintext rows")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--program", type=Path, required=True)
    _add_field_flags(p)
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser("serve", help="run a share daemon")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--index", type=int, default=None, help="1-based server role")
    p.add_argument("--data-dir", type=Path, default=None)
    p.set_defaults(handler=cmd_serve)

    p = sub.add_parser("bench", help="time eval/dec on full quadratic programs")
    p.add_argument("--sizes", type=_int_list, default=[10, 50, 100, 500, 1000])
    p.add_argument("--schemes", default=None, help="comma-separated, default 2S,2V")
    p.add_argument("--repetitions", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=Path, default=None)
    _add_field_flags(p)
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("game", help="run the verifiable-scheme forgery game")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--queries", type=int, default=16)
    p.add_argument("--seed", type=int, default=None)
    _add_field_flags(p)
    p.set_defaults(handler=cmd_game)

    p = sub.add_parser("queue-sim", help="mean waiting time of t requests at one worker")
    p.add_argument("--t", type=int, nargs="+", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--scheme", choices=[t.value for t in BENCH_SCHEMES], default="2S")
    p.add_argument("--mode", choices=["analytic", "executed"], default="analytic")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=Path, default=None)
    _add_field_flags(p)
    p.set_defaults(handler=cmd_queue_sim)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    configure_logging(args.log_level or settings.log_level)

    try:
        return args.handler(args, settings)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"dcled: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TransportError as exc:
        print(f"transport error: {exc.detail}", file=sys.stderr)
        return EXIT_TRANSPORT
    except (StorageError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ParameterError as exc:
        print(f"invalid input: {exc.detail}", file=sys.stderr)
        return EXIT_USAGE
    except DelegationError as exc:
        print(f"{exc.code}: {exc.detail}", file=sys.stderr)
        return EXIT_FAILURE
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
