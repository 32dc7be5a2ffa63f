"""Command-line front end: validate, eval, graph, check, serve.

Exit codes: 0 success, 1 validation/check failure, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import signal
import sys

from . import authz, engine, graph, selfcheck, service
from .config import PolicyConfig, load_policy
from .errors import CbacError, ConfigError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _fact_entry(raw: str) -> tuple[str, list]:
    """--fact FACT_ID=v1,v2 with booleans spelled true/false."""
    fact_id, _, rest = raw.partition("=")
    if not fact_id:
        raise argparse.ArgumentTypeError("expected FACT_ID=value[,value...]")
    values: list = []
    if rest:
        for token in rest.split(","):
            token = token.strip()
            if token in ("true", "false"):
                values.append(token == "true")
            else:
                values.append(token)
    return fact_id, values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbac", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def policy_arg(p: argparse.ArgumentParser) -> None:
        p.add_argument("policy_dir", help="policy configuration directory")
        p.add_argument("--lenient", action="store_true", help="ignore unknown JSON fields")

    p_validate = sub.add_parser("validate", help="load a policy directory and report every problem")
    policy_arg(p_validate)

    p_eval = sub.add_parser("eval", help="evaluate the policy and print the resulting pars")
    policy_arg(p_eval)
    p_eval.add_argument("--fact", action="append", default=[], type=_fact_entry,
                        metavar="FACT_ID=v1,v2", help="inject a custom fact (repeatable)")
    p_eval.add_argument("--priority", choices=("permissions", "prohibitions"), default="permissions")
    p_eval.add_argument("--json", action="store_true", help="emit JSON instead of a table")

    p_graph = sub.add_parser("graph", help="export the policy graph")
    policy_arg(p_graph)
    p_graph.add_argument("--fact", action="append", default=[], type=_fact_entry, metavar="FACT_ID=v1,v2")
    p_graph.add_argument("--priority", choices=("permissions", "prohibitions"), default="permissions")
    p_graph.add_argument("--format", choices=("node-link", "dot"), default="node-link")
    p_graph.add_argument("-o", "--output", default="-", help="output file (default stdout)")

    p_check = sub.add_parser("check", help="cross-check the engine against the set oracle")
    policy_arg(p_check)
    p_check.add_argument("--policies", type=int, default=100, help="number of random policies")
    p_check.add_argument("--seed", type=int, default=20260808)
    p_check.add_argument("--budget", type=int, default=100_000)

    p_serve = sub.add_parser("serve", help="run the REST service")
    p_serve.add_argument("policy_dir", nargs="?", default=None,
                         help="policy configuration directory (default: $GACM_POLICY_DIR)")
    p_serve.add_argument("--lenient", action="store_true", help="ignore unknown JSON fields")
    p_serve.add_argument("--addr", default=None, help="host:port (default: $GACM_ADDR or 127.0.0.1:8000)")
    p_serve.add_argument("--cors-origin", default="*", help="Access-Control-Allow-Origin value")
    return parser


def _load(args) -> PolicyConfig:
    return load_policy(args.policy_dir, lenient=args.lenient)


def cmd_validate(args) -> int:
    try:
        policy = _load(args)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION
    registry = policy.registry
    print(f"{args.policy_dir}: ok "
          f"({len(registry.principals)} principals, {len(registry.categories)} categories, "
          f"{len(registry.actions)} actions, {len(registry.resources)} resources, "
          f"{len(policy.pcas)} pcas, {len(policy.arcas)} arcas, {len(policy.barcas)} barcas)")
    return EXIT_OK


def cmd_eval(args) -> int:
    policy = _load(args)
    result = engine.evaluate_scenario(policy, args.fact, args.priority)
    if args.json:
        print(json.dumps([service.serialize_par(p) for p in result.pars], indent=2))
        return EXIT_OK
    rows = [(p.principal, p.permission.resource, p.permission.action, p.sign.value, " > ".join(p.chain))
            for p in result.pars]
    header = ("principal", "resource", "action", "sign", "chain")
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i]) for i in range(5)]
    print("  ".join(h.ljust(widths[i]) for i, h in enumerate(header)))
    for row in rows:
        print("  ".join(v.ljust(widths[i]) for i, v in enumerate(row)))
    print(f"# {len(rows)} pars, {result.report.fired_count} rule firings")
    return EXIT_OK


def cmd_graph(args) -> int:
    policy = _load(args)
    result = engine.evaluate_scenario(policy, args.fact, args.priority)
    g = graph.build_graph(result.pars, policy.registry)
    text = graph.export_graph(g, args.format)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
        print(f"wrote {args.format} graph to {args.output}")
    return EXIT_OK


def cmd_check(args) -> int:
    policy = _load(args)
    failures = 0
    for priority in ("permissions", "prohibitions"):
        verdict = authz.check_equivalence(policy, (), priority)
        status = "ok" if verdict.ok else "MISMATCH"
        print(f"fixture equivalence ({priority}): {status}")
        if not verdict.ok:
            print(verdict.describe())
            failures += 1
    report = selfcheck.run_random_suite(args.policies, args.seed, args.budget)
    print(report.describe())
    return EXIT_OK if report.ok and not failures else EXIT_VALIDATION


def cmd_serve(args) -> int:
    if args.policy_dir is None:
        args.policy_dir = os.environ.get("GACM_POLICY_DIR")
    if not args.policy_dir:
        print("serve: no policy directory given and GACM_POLICY_DIR is unset", file=sys.stderr)
        return EXIT_VALIDATION
    policy = _load(args)
    svc = service.PolicyService(policy, cors_origin=args.cors_origin)
    addr = args.addr or os.environ.get("GACM_ADDR") or "127.0.0.1:8000"
    host, _, port_text = addr.partition(":")
    server = service.make_server(svc, host or "127.0.0.1", int(port_text or "8000"))

    if hasattr(signal, "SIGHUP"):
        def reload_policy(signum, frame):
            try:
                svc.replace_policy(load_policy(args.policy_dir, lenient=args.lenient))
                print("policy reloaded", file=sys.stderr)
            except ConfigError as exc:
                print(f"reload failed, keeping old policy:\n{exc}", file=sys.stderr)
        signal.signal(signal.SIGHUP, reload_policy)

    print(f"serving policy {args.policy_dir!r} on http://{server.server_address[0]}:{server.server_address[1]}",
          flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "validate": cmd_validate,
        "eval": cmd_eval,
        "graph": cmd_graph,
        "check": cmd_check,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION
    except CbacError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
