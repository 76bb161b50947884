"""Command-line front end.

Exit status is 0 on success, 1 on invalid input and 2 when ``reproduce``
finds a count that differs from the reference value.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import ber_sim, fixtures
from .cycle_engine import count_cycles, cycles_through_replica, girth
from .md_coupler import (ConsistencyError, MdCode, MdMapping, assemble_md,
                         majority_vote_relocate, md_cycle_count, pp_cpo)
from .qc_core import (BlockMatrix, CodeParams, ValidationError, expand, load_block_matrix,
                      read_alist, save_block_matrix, write_alist)
from .sc_builder import ScCode, build_sc, code_stats, load_grid, save_code

EXIT_OK, EXIT_INVALID, EXIT_MISMATCH = 0, 1, 2


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None


def load_any(path):
    """Load a code file: SC descriptor, MD descriptor, block matrix or alist."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"no such file: {path}")
    if path.suffix == ".json":
        data = _read_json(path)
        if "mapping" in data:
            return MdCode.from_dict(data)
        return ScCode.from_dict(data)
    if path.suffix == ".alist":
        return read_alist(path)
    return load_block_matrix(path)


def block_matrix_of(obj) -> BlockMatrix:
    if isinstance(obj, MdCode):
        return obj.h_md
    if isinstance(obj, ScCode):
        return obj.h_sc
    if isinstance(obj, BlockMatrix):
        return obj
    raise ValidationError("this command needs a circulant-based code, not a binary matrix")


def _load_sc(path) -> ScCode:
    obj = load_any(path)
    if not isinstance(obj, ScCode):
        raise ValidationError(f"{path} is not an SC code descriptor")
    return obj


def _load_md(path) -> MdCode:
    obj = load_any(path)
    if not isinstance(obj, MdCode):
        raise ValidationError(f"{path} is not an MD code descriptor")
    return obj


# ------------------------------------------------------------------ commands

def cmd_build_sc(args):
    pm, cm = load_grid(args.pm), load_grid(args.cm)
    params = CodeParams(pm.shape[0], pm.shape[1], args.z, args.m, args.L)
    sc = build_sc(cm, pm, params)
    if args.out.endswith(".json"):
        save_code(sc, args.out)
    else:
        save_block_matrix(sc.h_sc, args.out)
    length, rate = code_stats(sc)
    print(f"H_SC: {sc.h_sc.n_block_rows}x{sc.h_sc.n_block_cols} blocks, "
          f"length {length}, design rate {rate:.4f} -> {args.out}")


def cmd_count_cycles(args):
    obj = load_any(args.code)
    bm = block_matrix_of(obj)
    if args.replica is not None:
        if not isinstance(obj, ScCode):
            raise ValidationError("--replica needs an SC code descriptor")
        census = cycles_through_replica(obj, args.k, args.replica, workers=args.threads)
        fold = obj.base_position
    else:
        census = count_cycles(bm, args.k, workers=args.threads)
        fold = None
    report = census.to_dict(with_cycles=args.with_cycles)
    report["participation"] = [[i, j, n] for (i, j), n in
                               sorted(census.participation(fold=fold).items())]
    if args.girth:
        g = girth(bm, args.kmax, workers=args.threads)
        report["girth"] = g if g is not None else f">{args.kmax}"
    print(f"cycles-{args.k}: {census.total}")
    if args.girth:
        print(f"girth: {report['girth']}")
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=1) + "\n")


def cmd_md_couple(args):
    sc = _load_sc(args.code)
    trace = []
    mapping = majority_vote_relocate(sc, args.k, args.max_reloc, workers=args.threads,
                                     trace=trace)
    for step in trace:
        action = {0: "keep", 1: "P", 2: "Q"}[step.action]
        print(f"{step.target} -> {action}  votes P={step.votes.to_p} Q={step.votes.to_q} "
              f"keep={step.votes.keep}")
    mapping.save(args.out)
    print(f"{mapping.n_relocated} relocations -> {args.out}")


def cmd_md_assemble(args):
    sc = _load_sc(args.code)
    mdc = assemble_md(sc, MdMapping.load(args.map))
    Path(args.out).write_text(json.dumps(mdc.to_dict(), indent=1) + "\n")
    print(f"H_MD: {mdc.h_md.n_block_rows}x{mdc.h_md.n_block_cols} blocks, "
          f"length {mdc.length}, design rate {mdc.rate:.4f} -> {args.out}")


def cmd_pp_cpo(args):
    mdc = _load_md(args.md)
    mapping = pp_cpo(mdc, args.k, workers=args.threads)
    mapping.save(args.out)
    print(f"{len(mapping.power_overrides)} powers changed -> {args.out}")


def cmd_md_count(args):
    mdc = _load_md(args.md)
    print(md_cycle_count(mdc, args.k, workers=args.threads, direct=not args.fast_only))


def cmd_simulate(args):
    if args.uncoded:
        code, rate = None, 1.0
    else:
        if not args.code:
            raise ValidationError("--code is required unless --uncoded is given")
        obj = load_any(args.code)
        code = obj if not isinstance(obj, (ScCode, MdCode)) else block_matrix_of(obj)
        rate = None
    points = ber_sim.simulate(
        code, ber_sim.parse_sweep(args.snr),
        ber_sim.DecoderConfig(max_iterations=args.iters, normalization=args.alpha),
        max_frames=args.max_frames, min_frame_errors=args.min_errors, seed=args.seed,
        rate=rate, workers=args.threads, uncoded_length=args.uncoded_length)
    ber_sim.write_csv(points, args.out)
    for p in points:
        print(f"{p.snr_db:6.2f} dB  frames={p.frames_run}  BER={p.ber:.3e}  FER={p.fer:.3e}")


def cmd_export(args):
    bm = block_matrix_of(load_any(args.code))
    if args.alist:
        write_alist(expand(bm), args.alist)
    if args.blocks:
        save_block_matrix(bm, args.blocks)
    if not (args.alist or args.blocks):
        raise ValidationError("nothing to export: give --alist and/or --blocks")


def reproduce_table1(workers=None, out=None) -> bool:
    out = out or sys.stdout
    ok = True
    for name, k, expected in fixtures.TABLE1:
        try:
            if name.startswith("MD"):
                got = md_cycle_count(fixtures.md_code(name), k, workers=workers)
            else:
                got = count_cycles(fixtures.sc_code(name).h_sc, k, workers=workers).total
        except ValidationError as exc:
            print(f"FAIL {name:13s} cycles-{k}: cannot build ({exc})", file=out)
            ok = False
            continue
        status = "PASS" if got == expected else "FAIL"
        ok &= got == expected
        print(f"{status} {name:13s} cycles-{k}: {got:>9,d} (reference {expected:,d})", file=out)
    return ok


def cmd_reproduce(args):
    if args.what != "table1":
        raise ValidationError(f"unknown reproduction target {args.what!r}")
    return EXIT_OK if reproduce_table1(args.threads) else EXIT_MISMATCH


# ---------------------------------------------------------------- argparse

def build_parser() -> argparse.ArgumentParser:
    env_threads = os.environ.get("MDSC_THREADS")
    p = argparse.ArgumentParser(prog="mdsc", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=int(env_threads) if env_threads else None,
                   help="worker threads (default: $MDSC_THREADS or all cores)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("build-sc", help="assemble an SC code from PM/CM files")
    s.add_argument("--pm", required=True)
    s.add_argument("--cm", required=True)
    s.add_argument("--z", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--L", type=int, required=True)
    s.add_argument("--out", required=True, help=".json for a descriptor, else block-matrix text")
    s.set_defaults(func=cmd_build_sc)

    s = sub.add_parser("count-cycles", help="count cycles of one length")
    s.add_argument("--code", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--girth", action="store_true")
    s.add_argument("--kmax", type=int, default=10)
    s.add_argument("--replica", type=int, default=None)
    s.add_argument("--with-cycles", action="store_true", help="list canonical block cycles")
    s.add_argument("--report", default=None)
    s.set_defaults(func=cmd_count_cycles)

    s = sub.add_parser("md-couple", help="majority-voting relocation")
    s.add_argument("--code", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--max-reloc", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_md_couple)

    s = sub.add_parser("md-assemble", help="build the coupled code from a mapping")
    s.add_argument("--code", required=True)
    s.add_argument("--map", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_md_assemble)

    s = sub.add_parser("pp-cpo", help="optimize powers of relocated circulants")
    s.add_argument("--md", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_pp_cpo)

    s = sub.add_parser("md-count", help="count cycles of a coupled code")
    s.add_argument("--md", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--fast-only", action="store_true", help="skip the direct cross-check")
    s.set_defaults(func=cmd_md_count)

    s = sub.add_parser("simulate", help="Monte-Carlo BER over AWGN")
    s.add_argument("--code", default=None)
    s.add_argument("--uncoded", action="store_true")
    s.add_argument("--uncoded-length", type=int, default=1000)
    s.add_argument("--snr", required=True, help="A:STEP:B or comma list, Eb/N0 in dB")
    s.add_argument("--max-frames", type=int, default=1000)
    s.add_argument("--min-errors", type=int, default=50)
    s.add_argument("--iters", type=int, default=50)
    s.add_argument("--alpha", type=float, default=0.75)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("export", help="write the binary matrix as alist")
    s.add_argument("--code", required=True)
    s.add_argument("--alist", default=None)
    s.add_argument("--blocks", default=None)
    s.set_defaults(func=cmd_export)

    s = sub.add_parser("reproduce", help="recompute the reference cycle counts from fixtures")
    s.add_argument("what", choices=["table1"])
    s.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        status = args.func(args)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConsistencyError as exc:
        print(f"internal consistency error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    return status or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
