"""Command-line front end.

Exit codes: 0 success / intact, 2 tampered, 64 usage, 65 bad input file,
70 internal error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

from . import analytics, auditor, bench, flow, tracegen
from .archive import KeyFile, LogArchive
from .encoder import SchemaTable, default_schema, encode
from .errors import ConfigError, FormatError, InputError, TamperLogError
from .workflow import sign_events

EXIT_OK, EXIT_TAMPERED, EXIT_USAGE, EXIT_FORMAT, EXIT_INTERNAL = 0, 2, 64, 65, 70

log = logging.getLogger("tamperlog")


class UsageError(TamperLogError):
    exit_code = EXIT_USAGE


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_key(path) -> KeyFile:
    if not path or not os.path.exists(path):
        raise UsageError(f"keyfile not found: {path}")
    return KeyFile.load(path)


def _load_schema(path) -> SchemaTable:
    return SchemaTable.load(path) if path else default_schema()


def _flow_from(args, n_cores):
    return flow.FlowConfig(args.sp, args.sr, args.tp, args.tr, n_cores)


# -- commands ---------------------------------------------------------------

def cmd_keygen(args):
    seed = bytes.fromhex(args.seed_hex) if args.seed_hex else os.urandom(16)
    if len(seed) != 16:
        raise UsageError("--seed-hex must be 32 hex digits")
    KeyFile(seed, args.cores, args.tau, args.cadence, args.rounds).save(args.out)
    return EXIT_OK


def cmd_generate(args):
    spec = tracegen.TraceSpec(args.duration, args.rate, args.cores, args.profile,
                              args.dup_rate, args.seed)
    schema = _load_schema(args.schema)
    events = tracegen.generate(spec, schema)
    tracegen.write_events(events, args.out)
    if args.arrivals:
        flow.write_trace(tracegen.to_arrivals(events, schema), args.arrivals)
    log.info("wrote %d events", len(events))
    return EXIT_OK


def cmd_sign(args):
    key = _load_key(args.key)
    if args.cores is not None or args.cadence is not None:
        key = KeyFile(key.master_seed, args.cores or key.n_cores,
                      key.tau, key.cadence if args.cadence is None else args.cadence, key.rounds)
    schema = _load_schema(args.schema)
    events = tracegen.read_events(args.trace)
    res = sign_events(events, key, schema, args.reduce, None if args.no_flow else _flow_from(args, key.n_cores))
    res.archive.save(args.out)
    report = {"signed": res.signed, "stored": len(res.archive.records),
              "secret_bytes": 48 * key.n_cores}
    if res.loss is not None:
        report["loss"] = res.loss.summary()
    if res.reduction is not None:
        report["reduction"] = dict(zip(("seen", "kept", "dropped", "evictions"), res.reduction))
    _emit(report, args.report)
    return EXIT_OK


def cmd_verify(args):
    key = _load_key(args.key)
    arc = LogArchive.load(args.archive)
    if (arc.tau, arc.n_cores) != (key.tau, key.n_cores):
        raise FormatError(f"archive (tau={arc.tau}, N={arc.n_cores}) does not match keyfile "
                          f"(tau={key.tau}, N={key.n_cores})")
    if args.schema and _load_schema(args.schema).digest() != arc.schema_hash:
        raise FormatError("archive was written with a different schema table")
    verdict = auditor.verify(arc.to_audit_input(key.master_seed))
    _emit(verdict.to_dict(), args.report)
    return EXIT_OK if verdict.intact else EXIT_TAMPERED


def cmd_attack(args):
    arc = LogArchive.load(args.archive)
    audit = arc.to_audit_input(bytes(16))
    if audit.total_records == 0:
        raise InputError("archive holds no records")
    if args.mode == "truncate":
        out = auditor.attack_truncate(audit, args.line, args.keep, args.present_checkpoint)
    elif args.mode == "modify":
        out = auditor.attack_modify(audit, args.line, args.index, args.bit)
    else:
        if not args.captured:
            raise UsageError("--mode replay needs --captured ARCHIVE")
        old = LogArchive.load(args.captured).to_audit_input(bytes(16))
        out = auditor.attack_replay(audit, old, args.line)
    LogArchive.from_audit_input(out, arc.schema_hash).save(args.out)
    return EXIT_OK


def cmd_simulate(args):
    cfg = flow.FlowConfig(args.sp, args.sr, args.tp, args.tr, args.cores)
    rep = flow.simulate(cfg, flow.read_trace(args.trace))
    summary = rep.summary()
    summary["feasible"] = cfg.feasible
    summary["required_ring_size"] = flow.required_ring_size(cfg.n_cores, cfg.s_p, cfg.t_p, cfg.t_r)
    _emit(summary, args.report)
    return EXIT_OK


def cmd_sweep(args):
    trace = flow.read_trace(args.trace)
    if args.grid == "reference":
        grid = flow.reference_grid(args.cores)
    else:
        grid = [flow.FlowConfig(sp, sr, tp, tr, args.cores)
                for sp in args.sp_list for sr in args.sr_list
                for tp in args.tp_list for tr in args.tr_list]
    flow.write_sweep_csv(flow.sweep(grid, trace), args.out)
    return EXIT_OK


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_analyze(args):
    rows = _read_csv(args.csv)
    try:
        if args.fieller:
            xs = [float(r[args.x]) for r in rows]
            ys = [float(r[args.y]) for r in rows]
            ci = analytics.fieller_ci(xs, ys, args.confidence)
            _emit({"rho": ci.rho, "lo": ci.lo, "hi": ci.hi, "confidence": ci.confidence, "n": ci.n},
                  args.report)
        else:
            fit = analytics.factorial_from_rows((r["x_s"], r["x_b"], r["y"]) for r in rows)
            _emit(fit.as_dict(), args.report)
    except KeyError as exc:
        raise FormatError(f"CSV lacks column {exc}") from None
    return EXIT_OK


def cmd_bench(args):
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    spec = tracegen.TraceSpec(args.duration, args.rate, args.cores, seed=args.seed)
    events = tracegen.generate(spec)
    schema = default_schema()
    records = [encode(e, schema) for e in events]
    seed = bytes(16)
    if args.factorial_csv:
        rows = bench.factorial_runs(seed, records, tracegen.to_arrivals(events, schema),
                                    args.cores, args.threads, args.replicates)
        with open(args.factorial_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x_s", "x_b", "y"])
            w.writerows(rows)
    rows = bench.run_bench(seed, records, args.cores, args.threads, args.mode)
    _emit({"hardware_threads": bench.hardware_threads(),
           "rows": [{"mode": r.mode, "threads": r.threads, "records": r.records,
                     "seconds": r.seconds, "records_per_sec": r.records_per_sec} for r in rows]},
          args.report)
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def _flow_args(p, cores=False):
    p.add_argument("--sp", type=int, default=32 * flow.KB, help="per-core buffer bytes")
    p.add_argument("--sr", type=int, default=64 * flow.MB, help="ring buffer bytes")
    p.add_argument("--tp", type=float, default=200.0, help="per-core flush interval (ms)")
    p.add_argument("--tr", type=float, default=1000.0, help="ring drain interval (ms)")
    if cores:
        p.add_argument("--cores", type=int, default=8)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tamperlog", description="Tamper-evident audit logging toolkit.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("keygen", help="create a keyfile")
    p.add_argument("--out", required=True)
    p.add_argument("--cores", type=int, default=8)
    p.add_argument("--tau", type=int, default=64, choices=(64, 128))
    p.add_argument("--cadence", type=int, default=1024)
    p.add_argument("--rounds", type=int, default=12, choices=(8, 12))
    p.add_argument("--seed-hex")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("generate", help="write a synthetic event trace (JSON lines)")
    p.add_argument("--out", required=True)
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--rate", type=float, default=1000.0)
    p.add_argument("--cores", type=int, default=4)
    p.add_argument("--profile", choices=tracegen.PROFILES, default="constant")
    p.add_argument("--dup-rate", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--schema")
    p.add_argument("--arrivals", help="also write a flow-control trace here")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sign", help="reduce, sign, buffer and archive an event trace")
    p.add_argument("trace")
    p.add_argument("--key", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--reduce", choices=("fixed", "dynamic"))
    p.add_argument("--cadence", type=int)
    p.add_argument("--cores", type=int)
    p.add_argument("--schema")
    p.add_argument("--no-flow", action="store_true", help="store every record, skip buffering model")
    p.add_argument("--report")
    _flow_args(p)
    p.set_defaults(func=cmd_sign)

    p = sub.add_parser("verify", help="audit an archive")
    p.add_argument("archive")
    p.add_argument("--key", required=True)
    p.add_argument("--schema")
    p.add_argument("--report")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("attack", help="write a tampered copy of an archive")
    p.add_argument("archive")
    p.add_argument("--mode", choices=("truncate", "modify", "replay"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--line", type=int, default=0)
    p.add_argument("--keep", type=int, default=0)
    p.add_argument("--present-checkpoint", action="store_true")
    p.add_argument("--index", type=int, default=1)
    p.add_argument("--bit", type=int, default=0)
    p.add_argument("--captured")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("simulate", help="run the buffering model on an arrival trace")
    p.add_argument("trace")
    p.add_argument("--report")
    _flow_args(p, cores=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="loss / flush table over a configuration grid")
    p.add_argument("trace")
    p.add_argument("--out", required=True)
    p.add_argument("--grid", choices=("reference", "custom"), default="custom")
    p.add_argument("--cores", type=int, default=8)
    p.add_argument("--sp-list", type=int, nargs="+", default=[32 * flow.KB])
    p.add_argument("--sr-list", type=int, nargs="+", default=[64 * flow.MB])
    p.add_argument("--tp-list", type=float, nargs="+", default=[200.0])
    p.add_argument("--tr-list", type=float, nargs="+", default=[1000.0])
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze", help="Fieller interval or factorial fit from a CSV")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--fieller", action="store_true")
    g.add_argument("--factorial", action="store_true")
    p.add_argument("csv")
    p.add_argument("--x", default="x", help="numerator column (Fieller)")
    p.add_argument("--y", default="y", help="denominator column (Fieller)")
    p.add_argument("--confidence", type=float, default=0.90)
    p.add_argument("--report")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bench", help="single-line vs per-core signing throughput")
    p.add_argument("--threads", type=int, default=bench.hardware_threads())
    p.add_argument("--mode", choices=("single-line", "per-core", "both"), default="both")
    p.add_argument("--cores", type=int, default=4)
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--rate", type=float, default=5000.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replicates", type=int, default=3)
    p.add_argument("--factorial-csv")
    p.add_argument("--report")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except TamperLogError as exc:
        print(f"tamperlog: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"tamperlog: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        log.exception("internal error: %s", exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
