"""Command-line entry point: ``otgerase {run,entangle,simplify,landauer}``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from typing import Any, Optional, Sequence

import numpy as np

from .erasure import FactorizationError, ell_max, entropy_bound, run_with_strategy, validate_witness, witness_from_promise_k
from .groups import GroupElement, Subgroup, intermediate_subgroups
from .hsp import OracleSpec, OracleValidationError, post_oracle_state, run_standard
from .instances import BUILTINS, ConfigError, builtin, load_oracle, load_witness, subgroup_from_generators
from .landauer import BathSpec, run_mode
from .simplify import build_simplified, compare_strategies, run_simplified

SCHEMA = 1
EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_ORACLE, EXIT_FACTOR = 0, 1, 2, 3, 4
LANDAUER_COLUMNS = ["n", "beta_delta", "mode", "p_init", "step", "ell", "p", "cumulative_work"]


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _element(g: GroupElement) -> Any:
    return g.coords[0] if g.group.rank == 1 else list(g.coords)


def _subgroup(S: Subgroup) -> list:
    return [_element(g) for g in S.elements]


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(out))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json(report: dict) -> str:
    return json.dumps({"schema": SCHEMA, **report}, indent=2, sort_keys=True) + "\n"


def _csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _load_instance(args) -> OracleSpec:
    if bool(args.instance) == bool(args.oracle_file):
        raise ConfigError("give exactly one of --instance or --oracle-file")
    return builtin(args.instance) if args.instance else load_oracle(args.oracle_file)


def _promise(args, f: OracleSpec) -> Optional[Subgroup]:
    if getattr(args, "k_generators", None):
        K = subgroup_from_generators(f.domain, args.k_generators)
        if not f.hidden <= K:
            raise ConfigError("K must contain the hidden subgroup")
        return K
    return f.promise_k


def _witness(args, f: OracleSpec):
    if getattr(args, "witness_file", None):
        w = load_witness(args.witness_file, f.domain)
        validate_witness(f, w)
        return w
    K = _promise(args, f)
    if K is None:
        raise ConfigError("this strategy needs --k-generators, --witness-file or an instance with a promised K")
    return witness_from_promise_k(f, K)


def _run_report(f: OracleSpec, result, strategy: str, args) -> dict:
    return {
        "instance": f.name or args.oracle_file,
        "group": str(f.domain),
        "strategy": strategy,
        "shots": args.shots,
        "seed": args.seed,
        "samples": [_element(g) for g in result.samples],
        "distribution": [float(p) for p in result.final_distribution],
        "distribution_group": str(result.group),
        "recovered_subgroup": _subgroup(result.recovered),
        "hidden_subgroup": _subgroup(f.hidden),
        "success": result.recovered == f.hidden,
        "ledger": {
            "entries": result.ledger.as_list() if result.ledger is not None else [],
            "total": result.ledger.total if result.ledger is not None else 0,
        },
        "qubits": result.qubits_used,
        "oracle_calls": result.oracle_calls,
    }


def cmd_run(args) -> int:
    f = _load_instance(args)
    if args.shots < 1:
        raise ConfigError("--shots must be at least 1")
    if args.strategy == "standard":
        result = run_standard(f, args.shots, args.seed)
    elif args.strategy == "simplified":
        so = build_simplified(f, _witness(args, f), args.mode)
        result = run_simplified(so, args.shots, args.seed)
    else:
        w = _witness(args, f) if args.strategy != "brute" else None
        result = run_with_strategy(f, args.strategy, w, args.shots, args.seed)
    report = _run_report(f, result, args.strategy, args)
    if args.format == "json":
        _emit(_json(report), args.out)
    else:
        G = result.group
        counts = np.bincount([g.index for g in result.samples], minlength=G.order)
        rows = [
            [i, "(" + ",".join(map(str, G.from_index(i).coords)) + ")", repr(float(p)), int(counts[i])]
            for i, p in enumerate(result.final_distribution)
        ]
        _emit(_csv(["index", "element", "probability", "count"], rows), args.out)
    return EXIT_OK if report["success"] else EXIT_MISMATCH


def cmd_entangle(args) -> int:
    f = _load_instance(args)
    state = post_oracle_state(f)
    lmax = ell_max(f.domain, f.hidden)
    table = []
    for K in intermediate_subgroups(f.hidden):
        ell = ell_max(f.domain, K)
        table.append({
            "K": _subgroup(K),
            "order": K.order,
            "ell": ell,
            "predicted_ledger": f.m - 2 * ell,
        })
    report = {
        "instance": f.name or args.oracle_file,
        "group": str(f.domain),
        "m": f.m,
        "conditional_entropy": round(entropy_bound(state), 12),
        "ell_max": lmax,
        "k_table": table,
    }
    if args.format == "json":
        _emit(_json(report), args.out)
    else:
        rows = [[row["order"], " ".join(map(str, row["K"])), row["ell"], row["predicted_ledger"]] for row in table]
        _emit(_csv(["order", "K", "ell", "predicted_ledger"], rows), args.out)
    return EXIT_OK


def cmd_simplify(args) -> int:
    f = _load_instance(args)
    w = _witness(args, f)
    so = build_simplified(f, w, args.mode)
    result = run_simplified(so, args.shots, args.seed)
    report = {
        "instance": f.name or args.oracle_file,
        "mode": so.mode,
        "qubits": {"original": f.n_qubits + f.m, "physical": so.physical_qubits, "variable": so.variable_qubits, "savings": so.qubit_savings},
        "reduced_group": str(so.reduced_domain),
        "reduced_table": list(so.reduced_table),
        "ledger": {"entries": result.ledger.as_list(), "total": result.ledger.total},
        "recovered": _subgroup(result.recovered),
        "hidden_subgroup": _subgroup(f.hidden),
        "distribution": [float(p) for p in result.final_distribution],
        "success": result.recovered == f.hidden,
        "seed": args.seed,
        "shots": args.shots,
    }
    if w.K is not None:
        report["comparison"] = compare_strategies(f, w.K, args.shots, args.seed, so.mode)
    if args.format == "json":
        _emit(_json(report), args.out)
    else:
        rows = [[i, repr(float(p))] for i, p in enumerate(result.final_distribution)]
        _emit(_csv(["reduced_index", "probability"], rows), args.out)
    return EXIT_OK if report["success"] else EXIT_MISMATCH


def cmd_landauer(args) -> int:
    if not 0 <= args.p_init <= 1:
        raise ConfigError("--p-init must lie in [0, 1]")
    rows = []
    for n in args.n:
        for bd in args.beta_delta:
            try:
                trace = run_mode(args.mode, BathSpec(n, bd), args.p_init)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            records = trace.rows()
            if args.final_only and records:
                records = records[-1:]
            for step, ell, p, w in records:
                rows.append([n, repr(float(bd)), args.mode, repr(float(args.p_init)), step, ell, repr(p), repr(w)])
    if args.format == "csv":
        _emit(_csv(LANDAUER_COLUMNS, rows), args.out)
    else:
        _emit(_json({"columns": LANDAUER_COLUMNS, "rows": rows}), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="otgerase", description="Exact simulation of on-the-go erasure in the Abelian hidden subgroup algorithm.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def instance_flags(sp):
        sp.add_argument("--instance", choices=sorted(BUILTINS), help="built-in instance name")
        sp.add_argument("--oracle-file", help="JSON oracle description")
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=["json", "csv"], default="json")

    def run_flags(sp):
        sp.add_argument("--k-generators", nargs="+", metavar="G", help='generators of K, e.g. 2 or "3,1"')
        sp.add_argument("--witness-file", help="JSON factorization witness")
        sp.add_argument("--shots", type=int, default=24)
        sp.add_argument("--seed", type=int, required=True)
        sp.add_argument("--mode", choices=["black-box", "open-circuit"], default=None, help="simplified oracle mode")

    run = sub.add_parser("run", help="solve the HSP with a chosen erasure strategy")
    instance_flags(run)
    run_flags(run)
    run.add_argument("--strategy", choices=["standard", "brute", "side-info", "battery", "simplified"], default="standard")
    run.set_defaults(func=cmd_run)

    ent = sub.add_parser("entangle", help="conditional entropy, maximal Bell pairs and the K table")
    instance_flags(ent)
    ent.set_defaults(func=cmd_entangle)

    simp = sub.add_parser("simplify", help="run the oracle reduced to K and compare strategies")
    instance_flags(simp)
    run_flags(simp)
    simp.set_defaults(func=cmd_simplify)

    land = sub.add_parser("landauer", help="ladder erasure protocol sweeps")
    land.add_argument("--n", type=int, nargs="+", required=True)
    land.add_argument("--beta-delta", type=float, nargs="+", required=True)
    land.add_argument("--p-init", type=float, default=0.5)
    land.add_argument("--mode", choices=["quantum", "classical", "truncated", "reverse"], default="classical")
    land.add_argument("--final-only", action="store_true", help="emit only the last step of each run")
    land.add_argument("--out")
    land.add_argument("--format", choices=["json", "csv"], default="csv")
    land.set_defaults(func=cmd_landauer)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OracleValidationError as exc:
        print(f"oracle validation failed: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except FactorizationError as exc:
        print(f"factorization failed: {exc}", file=sys.stderr)
        return EXIT_FACTOR


if __name__ == "__main__":
    sys.exit(main())
