"""Command-line client for the allocation service.

Every subcommand builds a request and sends it through HTTP semantics:
in-process against the bundled app by default, or to a remote server via
``--url``.  Exit codes: 0 success, 1 verification mismatch, 2 bad input,
3 solver failure.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys

import httpx

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_BAD_INPUT = 2
EXIT_SOLVER = 3


def _read_scenario(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else open(path).read()
        data = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise SystemExit(_fail(f"cannot read scenario: {exc}", EXIT_BAD_INPUT))
    if not isinstance(data, dict) or "users" not in data:
        raise SystemExit(_fail("scenario JSON needs a 'users' list", EXIT_BAD_INPUT))
    return data


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _post(args: argparse.Namespace, path: str, payload: dict) -> httpx.Response:
    if args.url:
        with httpx.Client(base_url=args.url, timeout=None) as client:
            return client.post(path, json=payload)

    from .service import create_app

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://noma-balance.local", timeout=None
        ) as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dispatch(args: argparse.Namespace, path: str, payload: dict) -> tuple[int, httpx.Response | None]:
    resp = _post(args, path, payload)
    if resp.status_code in (400, 422):
        return _fail(resp.text, EXIT_BAD_INPUT), None
    if resp.status_code >= 500:
        return _fail(resp.text, EXIT_SOLVER), None
    return EXIT_OK, resp


def _solver_payload(args: argparse.Namespace) -> dict:
    return {
        "eps_outer": args.eps_outer,
        "eps_inner": args.eps_inner,
    }


def cmd_solve(args: argparse.Namespace) -> int:
    code, resp = _dispatch(args, "/solve", _read_scenario(args.scenario))
    if code:
        return code
    _emit(json.dumps(resp.json(), indent=2), args.out)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    payload: dict = {
        "table1": args.table1,
        "resolution": args.resolution,
        "snr_db": args.snr_db,
    }
    if not args.table1:
        if not args.scenario:
            return _fail("give a scenario file or --table1", EXIT_BAD_INPUT)
        payload["scenario"] = _read_scenario(args.scenario)
    code, resp = _dispatch(args, "/verify", payload)
    if code:
        return code
    body = resp.json()
    _emit(json.dumps(body, indent=2), args.out)
    return EXIT_OK if body["ok"] else EXIT_MISMATCH


def cmd_mc(args: argparse.Namespace) -> int:
    payload = {
        "k": args.k,
        "r_sum": args.rsum,
        "trials": args.trials,
        "seed": args.seed,
        "snr_db": args.snr_db,
        "schemes": args.scheme or ["NOMA", "TDMA-PA", "TDMA-PARA"],
        "solver": _solver_payload(args),
        "format": args.format,
    }
    code, resp = _dispatch(args, "/mc", payload)
    if code:
        return code
    text = resp.text if args.format == "csv" else json.dumps(resp.json(), indent=2)
    _emit(text, args.out)
    return EXIT_OK


def cmd_snr_sweep(args: argparse.Namespace) -> int:
    payload = {
        "k": args.k,
        "r_sums": args.rsum or [2.0, 3.0, 4.0],
        "trials": args.trials,
        "seed": args.seed,
        "snr_db": args.snr_db,
        "schemes": args.scheme or ["NOMA", "TDMA-PA", "TDMA-PARA"],
        "target_outage": args.target,
        "tol_db": args.tol_db,
        "solver": _solver_payload(args),
        "format": args.format,
    }
    code, resp = _dispatch(args, "/snr-sweep", payload)
    if code:
        return code
    text = resp.text if args.format == "csv" else json.dumps(resp.json(), indent=2)
    _emit(text, args.out)
    return EXIT_OK


def cmd_group(args: argparse.Namespace) -> int:
    payload = {
        "scenario": _read_scenario(args.scenario),
        "l": args.l,
        "grouping": args.grouping,
        "allocation": args.allocation,
        "sub_slots": args.t_discrete,
        "seed": args.seed,
        "solver": _solver_payload(args),
    }
    code, resp = _dispatch(args, "/group", payload)
    if code:
        return code
    _emit(json.dumps(resp.json(), indent=2), args.out)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("noma_balance.service:app", host=args.host, port=args.port)
    return EXIT_OK


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps-outer", type=float, default=1e-10)
    p.add_argument("--eps-inner", type=float, default=1e-12)


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the response to this file")
    p.add_argument("--format", choices=["csv", "json"], default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noma-balance",
        description="Outage-balanced NOMA allocation: solve, verify, group, simulate.",
    )
    parser.add_argument("--url", help="remote service URL (default: run in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one scenario")
    p.add_argument("scenario", help="scenario JSON file, or - for stdin")
    _add_output_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="closed form vs exhaustive search")
    p.add_argument("scenario", nargs="?", help="scenario JSON file")
    p.add_argument("--table1", action="store_true", help="run the bundled cases")
    p.add_argument("--resolution", type=float, default=1.0 / 200.0)
    p.add_argument("--snr-db", type=float, default=10.0)
    _add_output_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("mc", help="Monte-Carlo average outage per scheme")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--rsum", type=float, required=True)
    p.add_argument("--snr-db", type=float, default=15.0)
    p.add_argument("--trials", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scheme", action="append", help="repeatable scheme name")
    _add_solver_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("snr-sweep", help="required SNR at a target outage")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--rsum", type=float, action="append", help="repeatable rate sum")
    p.add_argument("--snr-db", type=float, default=15.0, help="reference SNR")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scheme", action="append", help="repeatable scheme name")
    p.add_argument("--target", type=float, default=0.1)
    p.add_argument("--tol-db", type=float, default=0.05)
    _add_solver_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_snr_sweep)

    p = sub.add_parser("group", help="partition users and allocate resources")
    p.add_argument("scenario", help="scenario JSON file, or - for stdin")
    p.add_argument("--l", type=int, required=True, help="group size")
    p.add_argument("--grouping", choices=["random", "optimal"], default="random")
    p.add_argument("--allocation", choices=["pa", "para", "discrete"], default="para")
    p.add_argument("--t-discrete", type=int, default=0, help="sub-slots per timeslot")
    p.add_argument("--seed", type=int, default=0)
    _add_solver_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_group)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else EXIT_BAD_INPUT
    except httpx.HTTPError as exc:
        return _fail(f"transport failure: {exc}", EXIT_SOLVER)


if __name__ == "__main__":
    sys.exit(main())
