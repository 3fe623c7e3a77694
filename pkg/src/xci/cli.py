"""Command-line front end.

Exit codes: 0 evaluated, 1 suite failure, 2 input error, 3 witness
construction precondition failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import __version__
from .checks import (
    check_eh_ci,
    check_inner_ci,
    check_inner_ci_bruteforce,
    check_outer_ci,
    check_plain_ci,
)
from .dist import BlockPartition, dist_to_dict, loads, parse_rat
from .errors import (
    EnumerationTooLarge,
    SupportOutsideRegion,
    WitnessError,
    XCIError,
)
from .generators import GridSpec, gen_cross, gen_pareto_axes, gen_perturbed, gen_product_ci
from .geometry import (
    CrossRegion,
    EHRegion,
    Region,
    enumerate_slabs,
    region_contains,
    region_from_dict,
    region_to_dict,
)
from .suites import run_cross_suite, run_eh_suite
from .witness import BUILDERS

EXIT_OK, EXIT_SUITE, EXIT_INPUT, EXIT_PRECONDITION = 0, 1, 2, 3
ALL_NOTIONS = ("plain", "eh", "inner", "inner-bf", "outer")


class InputError(Exception):
    """Bad command-line input; maps to exit 2."""


# -- helpers -------------------------------------------------------------------


def _read_input(path: str) -> tuple:
    try:
        raw = sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    digest = hashlib.sha256(raw).hexdigest()
    try:
        dist = loads(raw.decode("utf-8"))
    except UnicodeDecodeError:
        raise InputError(f"{path} is not UTF-8 text") from None
    return dist, digest


def _partition(text: Optional[str], dimension: int) -> BlockPartition:
    part = BlockPartition.parse(text) if text else BlockPartition.default(dimension)
    part.check(dimension)
    return part


def _region(text: str, partition: BlockPartition, threshold: Fraction) -> Region:
    if text == "eh":
        return EHRegion(threshold)
    if text == "cross":
        return CrossRegion(partition, threshold)
    if text.startswith("explicit:"):
        path = text[len("explicit:"):]
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot load region file {path}: {exc}") from None
        if isinstance(data, list):
            data = {"type": "explicit", "points": data}
        return region_from_dict(data, partition)
    raise InputError(f"unknown region {text!r}; use eh, cross or explicit:<path>")


def _emit(payload: dict, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _error_payload(exc: BaseException) -> dict:
    cert = getattr(exc, "certificate", None)
    return {
        "error": type(exc).__name__,
        "message": str(exc),
        "certificate": cert.to_dict() if hasattr(cert, "to_dict") else None,
    }


def _csv_rats(text: str) -> list:
    return [parse_rat(s) for s in text.split(",") if s.strip()]


# -- subcommands -----------------------------------------------------------------


def cmd_check(args) -> int:
    dist, digest = _read_input(args.input)
    partition = _partition(args.partition, dist.dimension)
    threshold = parse_rat(args.threshold)
    region = _region(args.region, partition, threshold)
    notions = [n.strip() for n in args.notions.split(",") if n.strip()]
    unknown = set(notions) - set(ALL_NOTIONS)
    if unknown or not notions:
        raise InputError(f"unknown notions {sorted(unknown)}; choose from {ALL_NOTIONS}")
    for p in dist:
        if not region_contains(region, p):
            raise SupportOutsideRegion(p)
    if args.slab_cap is not None and "inner" in notions:
        count = len(enumerate_slabs(dist.support, partition, region))
        if count > args.slab_cap:
            raise EnumerationTooLarge(count, args.slab_cap)

    runners = {
        "plain": lambda: check_plain_ci(dist, partition),
        "eh": lambda: check_eh_ci(dist, partition, threshold),
        "inner": lambda: check_inner_ci(dist, partition, region),
        "inner-bf": lambda: check_inner_ci_bruteforce(dist, partition, region, args.rect_cap),
        "outer": lambda: check_outer_ci(dist, partition),
    }
    verdicts, timing = {}, {}
    for name in notions:
        start = time.perf_counter()
        verdicts[name] = runners[name]()
        timing[name] = round(time.perf_counter() - start, 6)
    _emit(
        {
            "input": {"path": args.input, "sha256": digest},
            "partition": str(partition),
            "region": region_to_dict(region),
            "summary": {n: v.holds for n, v in verdicts.items()},
            "verdicts": {n: v.to_dict() for n, v in verdicts.items()},
            "timingSeconds": timing,
        },
        args.out,
    )
    return EXIT_OK


def cmd_witness(args) -> int:
    dist, digest = _read_input(args.input)
    partition = _partition(args.partition, dist.dimension)
    threshold = parse_rat(args.threshold)
    try:
        witness = BUILDERS[args.method](dist, partition, threshold)
    except (WitnessError, SupportOutsideRegion) as exc:
        payload = _error_payload(exc)
        payload["input"] = {"path": args.input, "sha256": digest}
        _emit(payload, None)
        print(f"xci: {args.method} precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    payload = witness.to_dict()
    payload["input"] = {"path": args.input, "sha256": digest}
    payload["partition"] = str(partition)
    _emit(payload, args.out)
    return EXIT_OK


def _parse_grid(text: str) -> GridSpec:
    return GridSpec(tuple(tuple(_csv_rats(coord)) for coord in text.split(";")))


def cmd_generate(args) -> int:
    threshold = parse_rat(args.threshold)
    rng = random.Random(args.seed)
    family = args.family
    if family == "pareto-axes":
        if not args.tail:
            raise InputError("pareto-axes needs --tail")
        dist = gen_pareto_axes(_csv_rats(args.tail), parse_rat(args.arm_weight))
    elif family in ("product-ci", "perturbed"):
        if family == "perturbed" and args.input:
            base, _ = _read_input(args.input)
            partition = _partition(args.partition, base.dimension)
        else:
            grid = _parse_grid(args.grid) if args.grid else None
            dim = grid.dimension if grid else args.dim
            partition = _partition(args.partition, dim)
            region = _region(args.region, partition, threshold)
            if grid is None:
                grid = GridSpec.random(rng, dim, (2, 3), threshold)
            base = gen_product_ci(rng, grid, partition, region)
        dist = base
        if family == "perturbed":
            region = _region(args.region, partition, threshold)
            slabs = enumerate_slabs(base.support, partition, region)
            if not slabs:
                raise InputError("no in-region slab to perturb")
            slab = rng.choice(slabs)
            corners = slab.corners(partition)
            room = min(base.mass(corners[2]), base.mass(corners[3]))
            eps = parse_rat(args.epsilon) if args.epsilon else room / 2
            dist = gen_perturbed(base, slab, eps, partition)
    elif family == "cross":
        partition = _partition(args.partition, args.dim)
        counts = [int(s) for s in (args.arms or "2,2").split(",")]
        names = [n for n, idx in zip("ABC", partition.blocks()) if idx]
        if len(counts) != len(names):
            raise InputError(f"--arms needs {len(names)} counts for blocks {','.join(names)}")
        dist = gen_cross(rng, partition, dict(zip(names, counts)), threshold, uniform=args.uniform)
    else:  # argparse restricts choices
        raise InputError(f"unknown family {family!r}")
    text = json.dumps(dist_to_dict(dist), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_suite(args) -> int:
    if args.trials < 1:
        raise InputError("--trials must be at least 1")
    threshold = parse_rat(args.threshold)
    with_bf = "inner-bf" in (args.notions or "")
    if args.shape == "eh":
        report = run_eh_suite(
            args.trials, args.seed, dim=args.dim, threshold=threshold,
            with_bruteforce=with_bf, jobs=args.jobs,
        )
    else:
        report = run_cross_suite(
            args.trials, args.seed, threshold=threshold, with_bruteforce=with_bf, jobs=args.jobs,
        )
    _emit(report.to_dict(), args.out)
    if not report.ok:
        print(f"xci: suite {args.shape} failed: {report.tallies}", file=sys.stderr)
        return EXIT_SUITE
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xci", description="Exact independence checks on finite non-product supports."
    )
    parser.add_argument("--version", action="version", version=f"xci {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("-i", "--input", required=True, help="distribution JSON ('-' for stdin)")
        p.add_argument("-o", "--out", help="write JSON here instead of stdout")
        p.add_argument("--partition", help='1-based blocks, e.g. "A=1;B=;C=2"')
        p.add_argument("--threshold", default="1", help="exceedance threshold (rational)")

    p = sub.add_parser("check", help="decide independence notions")
    common(p)
    p.add_argument("--region", default="eh", help="eh | cross | explicit:<path>")
    p.add_argument("--notions", default="eh,inner,outer", help=f"comma list of {ALL_NOTIONS}")
    p.add_argument("--slab-cap", type=int, default=None, help="refuse more slabs than this")
    p.add_argument("--rect-cap", type=int, default=None, help="brute-force rectangle cap")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("witness", help="construct and verify a witness W")
    common(p)
    p.add_argument("--method", choices=sorted(BUILDERS), default="generic")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("generate", help="emit a seeded test distribution")
    common(p, needs_input=False)
    p.add_argument("-i", "--input", help="base law for --family perturbed")
    p.add_argument(
        "--family", required=True, choices=["product-ci", "perturbed", "cross", "pareto-axes"]
    )
    p.add_argument("--seed", default="0")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--region", default="eh", help="eh | cross | explicit:<path>")
    p.add_argument("--grid", help='per-coordinate values, e.g. "0,2,3;0,2,3"')
    p.add_argument("--epsilon", help="perturbation size (default: half the room)")
    p.add_argument("--arms", help="atom counts per present block, e.g. 2,3")
    p.add_argument("--uniform", action="store_true", help="equal masses on cross atoms")
    p.add_argument("--tail", help="Pareto tail grid, e.g. 2,4")
    p.add_argument("--arm-weight", default="1/2")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("suite", help="run a seeded equivalence suite")
    p.add_argument("--shape", choices=["eh", "cross"], default="eh")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", default="1")
    p.add_argument("--dim", type=int, default=2, choices=[2, 3])
    p.add_argument("--threshold", default="1")
    p.add_argument("--notions", help="add inner-bf to include the brute-force oracle")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, XCIError, ValueError) as exc:
        print(f"xci: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
