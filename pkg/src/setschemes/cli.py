"""Command-line interface.

Exit status: 0 when the requested property holds, 1 when it fails (for
example an incoherent partition or a table mismatch), 2 on unreadable input
or bad usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import constructions, enumeration
from .coherence import (MODES, CoherenceWitness, is_coherent, structure_constants,
                        wl_stabilize)
from .core import (SchemeFormatError, SetPartition, canonical_form, canonical_labeling,
                   elements, parse_partition, serialize_partition)
from .groups import (Permutation, automorphism_group, describe_group, is_schurian,
                     parse_group, weak_automorphism_group)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad input or usage; maps to exit status 2."""


@dataclass
class RunReport:
    command: str
    inputs: dict
    exit_status: int = EXIT_OK
    payload: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    wall_time: float = 0.0

    def to_json(self) -> str:
        # wall time goes to stderr so stdout is reproducible byte for byte
        doc = asdict(self)
        del doc["wall_time"]
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"


# -- helpers ----------------------------------------------------------------------

def _read_scheme(path: str) -> SetPartition:
    try:
        with open(path) as fh:
            return parse_partition(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except SchemeFormatError as exc:
        raise InputError(f"{path}: {exc}") from None


def _emit_scheme(S: SetPartition, path: str, report: RunReport, mode: str = "triangle") -> None:
    """Write a scheme file, then re-read it and confirm the same coherence verdict."""
    text = serialize_partition(S)
    with open(path, "w") as fh:
        fh.write(text)
    with open(path) as fh:
        back = parse_partition(fh.read())
    if back != S or is_coherent(back, mode) != is_coherent(S, mode):
        raise RuntimeError(f"{path} does not round-trip")
    report.files.append(path)


def _write_text(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _format_rows(header: list[str], rows: list[list], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()
    if fmt == "json":
        return json.dumps([dict(zip(header, r)) for r in rows], indent=1, ensure_ascii=False) + "\n"
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(str(x) for x in r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def _subset_text(a: int) -> str:
    return "{" + ",".join(str(x) for x in elements(a)) + "}"


def _yn(flag: bool) -> str:
    return "Y" if flag else "N"


def _witness_dict(w: CoherenceWitness) -> dict:
    return {"alpha": w.alpha, "a": list(elements(w.a)), "a_prime": list(elements(w.a_prime)),
            "beta": w.beta, "gamma": w.gamma, "tau": list(w.tau), "counts": list(w.counts)}


# -- commands -----------------------------------------------------------------------

def cmd_check(args, report: RunReport) -> str:
    S = _read_scheme(args.file)
    if not S.is_size_homogeneous():
        report.exit_status = EXIT_FAIL
        report.payload = {"coherent": False, "reason": "not size-homogeneous"}
        return "not size-homogeneous\n"
    result = structure_constants(S, args.mode)
    if isinstance(result, CoherenceWitness):
        report.exit_status = EXIT_FAIL
        report.payload = {"coherent": False, "witness": _witness_dict(result)}
        w = result
        return (f"incoherent ({args.mode}): in cell {w.alpha}, {_subset_text(w.a)} and "
                f"{_subset_text(w.a_prime)} see {w.counts[0]} vs {w.counts[1]} pairs "
                f"in cells ({w.beta}, {w.gamma}) of type {tuple(w.tau)}\n")
    report.payload = {"coherent": True, "rank": S.rank, "mode": args.mode,
                      "nonzero_constants": len(result.entries)}
    if args.out:
        _write_text(result.to_csv(), args.out)
        report.files.append(args.out)
    return f"coherent ({args.mode}), rank {S.rank}\n"


def cmd_stabilize(args, report: RunReport) -> str:
    S = _read_scheme(args.file)
    T = wl_stabilize(S, args.mode, use_aut=args.use_aut, threads=args.threads)
    report.payload = {"rank_before": S.rank, "rank_after": T.rank}
    if args.out:
        _emit_scheme(T, args.out, report, args.mode)
        return f"rank {S.rank} -> {T.rank}\n"
    return serialize_partition(T)


def _group_payload(G) -> dict:
    return {"order": G.order, "description": describe_group(G),
            "generators": [str(g) for g in G.generators]}


def cmd_aut(args, report: RunReport) -> str:
    S = _read_scheme(args.file)
    G = weak_automorphism_group(S) if args.weak else automorphism_group(S)
    report.payload = _group_payload(G)
    gens = " ".join(report.payload["generators"]) or "()"
    return f"order {G.order} ({report.payload['description']}); generators {gens}\n"


def cmd_schurian(args, report: RunReport) -> str:
    S = _read_scheme(args.file)
    if not is_coherent(S, "triangle"):
        report.exit_status = EXIT_FAIL
        report.payload = {"coherent": False}
        return "not coherent\n"
    G = automorphism_group(S)
    flag = is_schurian(S, G)
    report.payload = {"schurian": flag, "aut_order": G.order}
    return f"{'schurian' if flag else 'nonschurian'}; |Aut| = {G.order}\n"


def cmd_enumerate(args, report: RunReport) -> str:
    try:
        state = enumeration.enumerate_all(
            args.degree, max_seconds=args.max_seconds, checkpoint_path=args.checkpoint,
            threads=args.threads, long_run=args.long_run,
            checkpoint_interval=args.checkpoint_interval)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    results = state.results()
    nonschurian = sum(1 for _, s in results if not s)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for S, _ in results:
            name = enumeration.canonical_id(canonical_form(S)) + ".json"
            _emit_scheme(S, os.path.join(args.out, name), report)
        summary = os.path.join(args.out, "summary.csv")
        _write_text(state.summary_csv(), summary)
        report.files.append(summary)
    report.payload = {"degree": args.degree, "complete": state.complete, "schemes": len(results),
                      "nonschurian": nonschurian}
    if not state.complete:
        report.exit_status = EXIT_FAIL
    status = "complete" if state.complete else "incomplete (checkpoint saved)"
    return f"degree {args.degree}: {len(results)} schemes, {nonschurian} nonschurian, {status}\n"


def cmd_catalog(args, report: RunReport) -> str:
    if args.id == "list":
        report.payload = {"ids": list(constructions.CATALOG_IDS)}
        return "\n".join(constructions.CATALOG_IDS) + "\n"
    try:
        entry = constructions.catalog(args.id)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None
    report.payload = {"id": entry.id, "degree": entry.scheme.degree, "rank": entry.scheme.rank,
                      "groups": list(entry.group_pair)}
    if args.out:
        _emit_scheme(entry.scheme, args.out, report)
        return f"{entry.id}: degree {entry.scheme.degree}, rank {entry.scheme.rank}\n"
    return serialize_partition(entry.scheme)


TABLE_HEADER = ["scheme", "rank", "|Aut|", "Aut", "homogeneous", "vertex-transitive",
                "fully coherent", "schurian"]


def _row_cells(name: str, row: constructions.TableRow) -> list:
    return [name, row.rank, row.aut_order, row.aut_description, _yn(row.homogeneous),
            _yn(row.vertex_transitive), _yn(row.fully_coherent), _yn(row.schurian)]


def cmd_table(args, report: RunReport) -> str:
    expected = constructions.EXPECTED_TABLE1 if args.which == "table1" else constructions.EXPECTED_TABLE2
    rows, diffs = [], []
    for name, want in expected.items():
        got = _row_cells(name, constructions.table_row(constructions.catalog(name).scheme))
        rows.append(got)
        for col, g, w in zip(TABLE_HEADER[1:], got[1:], _row_cells(name, want)[1:]):
            if g != w:
                diffs.append({"scheme": name, "column": col, "computed": g, "expected": w})
    report.payload = {"table": args.which, "rows": [dict(zip(TABLE_HEADER, r)) for r in rows],
                      "mismatches": diffs}
    text = _format_rows(TABLE_HEADER, rows, args.format or "md")
    if diffs:
        report.exit_status = EXIT_FAIL
        text += "".join(f"MISMATCH {d['scheme']} {d['column']}: computed {d['computed']}, "
                        f"expected {d['expected']}\n" for d in diffs)
    if args.out:
        _write_text(text, args.out)
        report.files.append(args.out)
        return f"{args.which}: {len(rows)} rows, {len(diffs)} mismatches\n"
    return text


def cmd_sandwich(args, report: RunReport) -> str:
    from . import sandwich

    S = _read_scheme(args.scheme)
    if args.m < 2:
        raise InputError("--m must be at least 2")
    C = sandwich.hamming_sandwich(S, args.m)
    lines = [f"[{args.m}]^S on {C.n} vertices"]
    report.payload = {"m": args.m, "vertices": C.n}
    if args.materialize or args.verify_wl:
        try:
            C.materialize()
        except ValueError as exc:
            raise InputError(str(exc)) from None
        report.payload["rank"] = C.rank
        lines.append(f"rank {C.rank}")
    if args.verify_wl:
        stable = sandwich.cc_wl_stabilize(C) == C
        report.payload["wl_stable"] = stable
        lines.append("WL-stable" if stable else "refined by WL")
        if not stable:
            report.exit_status = EXIT_FAIL
    if args.report or not (args.materialize or args.verify_wl):
        rep = sandwich.sandwich_report(S, args.m)
        report.payload["report"] = asdict(rep)
        lines.append(json.dumps(asdict(rep), sort_keys=True))
    return "\n".join(lines) + "\n"


def cmd_vas(args, report: RunReport) -> str:
    from . import vector

    if args.check:
        try:
            with open(args.check) as fh:
                S = vector.parse_vas(fh.read())
        except OSError as exc:
            raise InputError(f"cannot read {args.check}: {exc.strerror}") from None
        except vector.VectorPartitionError as exc:
            raise InputError(f"{args.check}: {exc}") from None
        if (S.k, S.degree) != (args.k, args.d):
            raise InputError(f"file has k={S.k}, d={S.degree}")
        ok, w = vector.vas_check(S)
        report.payload = {"coherent": ok, "rank": S.rank, "homogeneous": S.is_homogeneous()}
        if not ok:
            report.exit_status = EXIT_FAIL
            report.payload["witness"] = {"alpha": w.alpha, "a": list(w.a), "a_prime": list(w.a_prime),
                                         "beta": w.beta, "gamma": w.gamma,
                                         "p_a": str(w.p_a), "p_a_prime": str(w.p_a_prime)}
            return (f"not a VAS: profiles {list(w.a)} and {list(w.a_prime)} give "
                    f"{w.p_a} vs {w.p_a_prime} for cells ({w.beta}, {w.gamma})\n")
        return f"VAS, rank {S.rank}\n"
    if args.orbital:
        try:
            G = parse_group(args.orbital, args.d)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        S = vector.vas_orbital(G, args.k)
        report.payload = {"rank": S.rank}
        text = vector.serialize_vas(S)
        if args.out:
            _write_text(text, args.out)
            report.files.append(args.out)
            return f"rank {S.rank}\n"
        return text
    try:
        results = vector.vas_enumerate(args.k, args.d)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    rows = []
    for i, r in enumerate(results):
        rows.append([i, r.scheme.rank, _yn(r.homogeneous), _yn(r.schurian)])
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            path = os.path.join(args.out, f"vas_{args.k}_{args.d}_{i}.json")
            _write_text(vector.serialize_vas(r.scheme), path)
            with open(path) as fh:
                if not vector.vas_check(vector.parse_vas(fh.read()))[0]:
                    raise RuntimeError(f"{path} does not re-verify")
            report.files.append(path)
    report.payload = {"k": args.k, "d": args.d, "schemes": len(results),
                      "homogeneous": sum(r.homogeneous for r in results),
                      "nonschurian": sum(not r.schurian for r in results)}
    return _format_rows(["index", "rank", "homogeneous", "schurian"], rows, args.format or "md")


def cmd_iso(args, report: RunReport) -> str:
    A, B = _read_scheme(args.file_a), _read_scheme(args.file_b)
    if A.degree != B.degree:
        raise InputError(f"degrees differ: {A.degree} vs {B.degree}")
    form_a, ga = canonical_labeling(A)
    form_b, gb = canonical_labeling(B)
    if form_a != form_b:
        report.exit_status = EXIT_FAIL
        reason = "ranks differ" if A.rank != B.rank else "canonical forms differ"
        report.payload = {"isomorphic": False, "reason": reason}
        return f"not isomorphic ({reason})\n"
    inv_b = np.empty(B.degree, dtype=np.int64)
    inv_b[list(gb)] = np.arange(B.degree)
    mapping = [int(inv_b[ga[i]]) for i in range(A.degree)]
    if A.permute(mapping) != B:
        raise RuntimeError("canonical labelings do not compose to an isomorphism")
    perm = Permutation(mapping)
    report.payload = {"isomorphic": True, "mapping": str(perm),
                      "images": [i + 1 for i in mapping]}
    return f"isomorphic via {perm}\n"


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker threads (output is identical)")
    common.add_argument("--format", choices=("json", "csv", "md"), default=None,
                        help="json prints a run report; csv/md select table format")
    common.add_argument("--out", default=None, help="output file (directory for enumerations)")

    parser = argparse.ArgumentParser(prog="setschemes", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="coherence with a witness on failure")
    p.add_argument("file")
    p.add_argument("--mode", choices=MODES, default="triangle")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("stabilize", parents=[common], help="coarsest coherent refinement")
    p.add_argument("file")
    p.add_argument("--mode", choices=MODES, default="triangle")
    p.add_argument("--use-aut", action="store_true", help="refine by automorphism orbits first")
    p.set_defaults(func=cmd_stabilize)

    p = sub.add_parser("aut", parents=[common], help="automorphism group")
    p.add_argument("file")
    p.add_argument("--weak", action="store_true", help="permutations mapping cells to cells")
    p.set_defaults(func=cmd_aut)

    p = sub.add_parser("schurian", parents=[common], help="compare with the orbital scheme of Aut")
    p.add_argument("file")
    p.set_defaults(func=cmd_schurian)

    p = sub.add_parser("enumerate", parents=[common], help="all schemes of one degree")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--long-run", action="store_true", help="allow degrees that take hours")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--checkpoint-interval", type=float, default=60.0, help="seconds")
    p.add_argument("--max-seconds", type=float, default=None)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("catalog", parents=[common], help="named nonschurian schemes")
    p.add_argument("id", help=f"one of {', '.join(constructions.CATALOG_IDS)}, or 'list'")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("table", parents=[common], help="recompute the catalog tables")
    p.add_argument("which", choices=("table1", "table2"))
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("sandwich", parents=[common], help="Hamming sandwich [m]^S")
    p.add_argument("--scheme", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--materialize", action="store_true")
    p.add_argument("--verify-wl", action="store_true")
    p.add_argument("--report", action="store_true")
    p.set_defaults(func=cmd_sandwich)

    p = sub.add_parser("vas", parents=[common], help="vector association schemes")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    action = p.add_mutually_exclusive_group(required=True)
    action.add_argument("--check", metavar="FILE")
    action.add_argument("--enumerate", action="store_true")
    action.add_argument("--orbital", metavar="GROUP")
    p.set_defaults(func=cmd_vas)

    p = sub.add_parser("iso", parents=[common], help="weak isomorphism of two schemes")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.set_defaults(func=cmd_iso)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_INPUT
    inputs = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "threads")}
    report = RunReport(args.command, inputs)
    began = time.perf_counter()
    try:
        text = args.func(args, report)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report.wall_time = time.perf_counter() - began
    if args.format == "json":
        sys.stdout.write(report.to_json())
    else:
        sys.stdout.write(text)
    print(f"wall time {report.wall_time:.2f}s", file=sys.stderr)
    return report.exit_status


if __name__ == "__main__":
    sys.exit(main())
