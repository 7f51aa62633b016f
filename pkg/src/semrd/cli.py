"""Command-line front end.

Machine output goes to stdout as deterministic CSV: fixed column order,
'.' decimal separator, 12 significant digits, LF line endings — identical
inputs and flags always produce byte-identical bytes.  Timing diagnostics go
to stderr so they never perturb the CSV surface.

Exit codes: 0 success, 1 validation failure (bad network file, uncodable
sample, corrupt stream, guard violation, failed check), 2 usage error.

The dense-table size guard defaults to 2^24 joint states and may be raised or
lowered with the ``SEMRD_SIZE_GUARD`` environment variable (capped at 2^28).
Network arguments take a file path, or the name of a bundled example
(fork, chain, scene).
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .bn import (
    BayesNet,
    conditional_partition,
    enumerate_joint,
    load_net,
    marginal_table,
    resolve_size_guard,
    sample,
    validate,
)
from .bounds import lemma1_bounds, lemma2_check
from .codec import (
    Bitstream,
    build_factorized_codebooks,
    build_joint_huffman,
    complexity_report,
    decode,
    encode,
    expected_length,
)
from .errors import SizeGuardError
from .info import (
    conditional_mutual_information,
    joint_entropy_bruteforce,
    joint_entropy_factorized,
    marginal_entropy,
    node_conditional_entropy,
    redundancy_gap,
)
from .nets import BUNDLED, bundled_path
from .rd import (
    DistortionSpec,
    ba_joint_multi,
    ba_joint_multi_target,
    binary_conditional_rd,
    default_slope_grid,
    gaussian_conditional_rd,
)

_ORACLE_TOL = 1e-9


@dataclass(frozen=True)
class RunConfig:
    """Parsed invocation: subcommand arguments plus the size-guard override."""

    args: argparse.Namespace
    size_guard: int


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _csv_line(*cells) -> str:
    return ",".join(c if isinstance(c, str) else _fmt(c) for c in cells)


def _emit(lines, out=None):
    text = "\n".join(lines) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="")


def _load(netarg: str) -> BayesNet:
    p = Path(netarg)
    if not p.exists() and netarg in BUNDLED:
        p = bundled_path(netarg)
    return load_net(p)


def _resolve_vars(net: BayesNet, spec: str | None, default):
    if spec is None:
        return list(default)
    return [net.id_of(tok if not tok.isdigit() else int(tok)) for tok in spec.split(",") if tok]


def _parse_floats(spec: str) -> list[float]:
    return [float(tok) for tok in spec.split(",") if tok]


def _dspec(net: BayesNet, name: str) -> DistortionSpec:
    if name == "hamming":
        return DistortionSpec.hamming(net.cards)
    if name == "squared":
        return DistortionSpec.squared_error(net.cards)
    raise argparse.ArgumentTypeError(f"unknown distortion {name!r}")


def _read_samples(path, m: int) -> np.ndarray:
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    rows = []
    for k, line in enumerate(text.splitlines()):
        line = line.strip()
        if not line:
            continue
        vals = line.split(",")
        if len(vals) != m:
            raise ValueError(f"line {k + 1}: expected {m} states, got {len(vals)}")
        rows.append([int(v) for v in vals])
    return np.array(rows, dtype=np.int64).reshape(-1, m)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_verify(cfg: RunConfig) -> int:
    net = _load(cfg.args.net)
    lines = []
    ok = True
    rep = validate(net)
    lines.append(_csv_line("check", "structure", "ok" if rep.ok else "fail"))
    ok &= rep.ok
    for v in rep.violations:
        lines.append(_csv_line("violation", "structure", v))
    if net.joint_states() <= cfg.size_guard:
        jt = enumerate_joint(net, limit=cfg.size_guard)
        gap = abs(joint_entropy_factorized(net) - joint_entropy_bruteforce(jt))
        good = gap <= _ORACLE_TOL
        lines.append(_csv_line("check", "entropy-oracle", "ok" if good else f"fail gap {_fmt(gap)}"))
        ok &= good
        red = redundancy_gap(net, limit=cfg.size_guard)
        good = red >= -_ORACLE_TOL
        lines.append(_csv_line("check", "redundancy-nonnegative", "ok" if good else f"fail {_fmt(red)}"))
        ok &= good
        worst = 0.0
        for v in range(net.m):
            part = conditional_partition(net, [v])
            for a_idx in range(len(part.blocks)):
                for b_idx in range(a_idx + 1, len(part.blocks)):
                    cmi = conditional_mutual_information(
                        jt, part.blocks[a_idx], part.blocks[b_idx], [v], clamp=False
                    )
                    worst = max(worst, cmi)
        good = worst <= _ORACLE_TOL
        lines.append(_csv_line("check", "partition-independence",
                               "ok" if good else f"fail cmi {_fmt(worst)}"))
        ok &= good
    else:
        lines.append(_csv_line("check", "entropy-oracle", "skipped: joint space over guard"))
    _emit(lines)
    return 0 if ok else 1


def cmd_entropy(cfg: RunConfig) -> int:
    net = _load(cfg.args.net)
    lines = [_csv_line("section", "key", "value_bits")]
    for i in range(net.m):
        lines.append(_csv_line("node", net.variables[i].name, node_conditional_entropy(net, i)))
    joint = joint_entropy_factorized(net)
    lines.append(_csv_line("summary", "joint_entropy", joint))
    if net.joint_states() <= cfg.size_guard:
        msum = sum(marginal_entropy(net, i) for i in range(net.m))
        lines.append(_csv_line("summary", "marginal_entropy_sum", msum))
        lines.append(_csv_line("summary", "redundancy_gap", msum - joint))
    _emit(lines, cfg.args.output)
    return 0


def cmd_sample(cfg: RunConfig) -> int:
    net = _load(cfg.args.net)
    arr = sample(net, cfg.args.n, cfg.args.seed)
    _emit([",".join(str(s) for s in row) for row in arr] if arr.size else [""], cfg.args.output)
    return 0


def cmd_encode(cfg: RunConfig) -> int:
    net = _load(cfg.args.net)
    arr = _read_samples(cfg.args.samples, net.m)
    fcb = build_factorized_codebooks(net)
    stream = encode(fcb, arr)
    Path(cfg.args.output).write_bytes(stream.to_bytes())
    print(f"encoded {stream.n} samples into {len(stream.payload)} payload bytes", file=sys.stderr)
    return 0


def cmd_decode(cfg: RunConfig) -> int:
    net = _load(cfg.args.net)
    stream = Bitstream.from_bytes(Path(cfg.args.stream).read_bytes())
    fcb = build_factorized_codebooks(net)
    arr = decode(fcb, stream)
    _emit([",".join(str(s) for s in row) for row in arr] if arr.size else [""], cfg.args.output)
    return 0


def cmd_codec_report(cfg: RunConfig) -> int:
    net = _load(cfg.args.net)
    t0 = time.perf_counter()
    rep = complexity_report(net, limit=cfg.size_guard)
    lines = [_csv_line("field", "value")]
    lines.append(_csv_line("variables", rep.n_variables))
    lines.append(_csv_line("max_cardinality", rep.max_cardinality))
    lines.append(_csv_line("max_in_degree", rep.max_in_degree))
    lines.append(_csv_line("joint_states", rep.joint_states))
    lines.append(_csv_line("factorized_code_bound", rep.factorized_code_bound))
    lines.append(_csv_line("factorized_entry_bound", rep.factorized_entry_bound))
    lines.append(_csv_line("factorized_codes_built", rep.factorized_codes_built))
    lines.append(_csv_line("factorized_entries_touched", rep.factorized_entries_touched))
    lines.append(_csv_line("joint_entropy_bits", joint_entropy_factorized(net)))
    fcb = build_factorized_codebooks(net)
    lines.append(_csv_line("factorized_expected_length_bits", expected_length(fcb, net)))
    if rep.joint_build_seconds is not None:
        jt = enumerate_joint(net, limit=cfg.size_guard)
        lines.append(_csv_line("joint_expected_length_bits",
                               expected_length(build_joint_huffman(jt, limit=cfg.size_guard), jt)))
    if rep.joint_note:
        lines.append(_csv_line("joint_note", rep.joint_note))
    _emit(lines)
    joint_s = "-" if rep.joint_build_seconds is None else f"{rep.joint_build_seconds:.6f}"
    print(
        f"timings: factorized build {rep.factorized_build_seconds:.6f}s, joint build {joint_s}s, "
        f"report total {time.perf_counter() - t0:.6f}s",
        file=sys.stderr,
    )
    return 0


def _rd_common(cfg: RunConfig, conditional: bool) -> int:
    net = _load(cfg.args.net)
    dspec = _dspec(net, cfg.args.distortion)
    if conditional:
        side = _resolve_vars(net, cfg.args.side, [])
        if not side:
            raise argparse.ArgumentTypeError("--side must name at least one variable")
        default_vars = [v for v in range(net.m) if v not in side]
    else:
        side = []
        default_vars = list(range(net.m))
    vars_ = _resolve_vars(net, cfg.args.vars, default_vars)
    if not vars_ or len(set(vars_)) != len(vars_) or set(vars_) & set(side):
        raise argparse.ArgumentTypeError("--vars must be distinct and disjoint from --side")
    scope = side + vars_
    jt = marginal_table(net, scope, limit=cfg.size_guard)
    n_side = int(np.prod([net.card(s) for s in side])) if side else 1
    arr = jt.probs.reshape((n_side,) + tuple(net.card(v) for v in vars_))
    dists = [dspec.for_var(v) for v in vars_]
    names = [net.variables[v].name for v in vars_]
    header = _csv_line(
        *[f"slope_{n}" for n in names], "rate_bits",
        *[f"distortion_{n}" for n in names], "iterations", "converged",
    )
    lines = [header]

    def add_point(pt):
        lines.append(_csv_line(*pt.slopes, pt.rate, *pt.distortions, pt.iterations, pt.converged))

    if cfg.args.targets is not None:
        targets = _parse_floats(cfg.args.targets)
        if len(targets) != len(vars_):
            raise argparse.ArgumentTypeError(f"{len(targets)} targets for {len(vars_)} variables")
        add_point(ba_joint_multi_target(arr, dists, targets, side=True, limit=cfg.size_guard))
    elif cfg.args.slopes is not None:
        slopes = _parse_floats(cfg.args.slopes)
        if len(slopes) != len(vars_):
            raise argparse.ArgumentTypeError(f"{len(slopes)} slopes for {len(vars_)} variables")
        add_point(ba_joint_multi(arr, dists, slopes, side=True, limit=cfg.size_guard))
    else:
        for s in default_slope_grid(cfg.args.sweep):
            add_point(ba_joint_multi(arr, dists, [s] * len(vars_), side=True, limit=cfg.size_guard))
    _emit(lines, cfg.args.output)
    return 0


def cmd_rd(cfg: RunConfig) -> int:
    return _rd_common(cfg, conditional=False)


def cmd_rd_cond(cfg: RunConfig) -> int:
    return _rd_common(cfg, conditional=True)


def cmd_rd_closed_form(cfg: RunConfig) -> int:
    if cfg.args.family == "binary":
        val = binary_conditional_rd(cfg.args.params[0], cfg.args.params[1])
    else:
        val = gaussian_conditional_rd(*cfg.args.params)
    print(f"{val:.6f}")
    return 0


def cmd_bounds(cfg: RunConfig) -> int:
    net = _load(cfg.args.net)
    targets = _parse_floats(cfg.args.targets)
    rep = lemma1_bounds(net, targets, _dspec(net, cfg.args.distortion), limit=cfg.size_guard)
    names = net.names
    lines = [
        _csv_line(*[f"target_{n}" for n in names], "lower_bits", "joint_bits", "upper_bits",
                  "slack_lower", "slack_upper", "converged"),
        _csv_line(*rep.targets, rep.lower, rep.joint, rep.upper,
                  rep.slack_lower, rep.slack_upper, rep.converged),
    ]
    _emit(lines, cfg.args.output)
    return 0


def cmd_lemma2(cfg: RunConfig) -> int:
    net = _load(cfg.args.net)
    side = _resolve_vars(net, cfg.args.side, [])
    if not side:
        raise argparse.ArgumentTypeError("--side must name at least one variable")
    targets = _parse_floats(cfg.args.targets)
    rep = lemma2_check(net, side, targets, _dspec(net, cfg.args.distortion), limit=cfg.size_guard)
    blocks = "|".join("+".join(net.variables[v].name for v in blk) for blk in rep.partition.blocks)
    lines = [
        _csv_line("blocks", "joint_conditional_bits", "subset_sum_bits", "delta", "converged"),
        _csv_line(blocks, rep.joint_conditional, rep.subset_sum, rep.delta, rep.converged),
    ]
    _emit(lines, cfg.args.output)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="semrd",
        description="Compression limits for Bayesian-network sources: entropy, "
                    "lossless codec, and (conditional) rate-distortion.",
    )
    ap.add_argument("--version", action="version", version=f"semrd {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def netarg(p):
        p.add_argument("net", help=f"network JSON file or bundled name ({', '.join(BUNDLED)})")

    p = sub.add_parser("verify", help="validate a network and run self-consistency checks")
    netarg(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("entropy", help="per-node conditional entropies, joint entropy, redundancy")
    netarg(p)
    p.add_argument("-o", "--output", default=None, help="write CSV here instead of stdout")
    p.set_defaults(fn=cmd_entropy)

    p = sub.add_parser("sample", help="draw ancestral samples as CSV state vectors")
    netarg(p)
    p.add_argument("-n", type=int, required=True, help="number of samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("encode", help="compress a samples file with the factorized codebook")
    netarg(p)
    p.add_argument("samples", help="CSV samples file ('-' for stdin)")
    p.add_argument("-o", "--output", required=True, help="output bitstream file")
    p.set_defaults(fn=cmd_encode)

    p = sub.add_parser("decode", help="decompress a bitstream back to samples")
    netarg(p)
    p.add_argument("stream", help="bitstream file")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=cmd_decode)

    p = sub.add_parser("codec-report", help="joint vs factorized codebook cost accounting")
    netarg(p)
    p.set_defaults(fn=cmd_codec_report)

    for name, fn, cond in (("rd", cmd_rd, False), ("rd-cond", cmd_rd_cond, True)):
        p = sub.add_parser(
            name,
            help="rate-distortion " + ("with a side set known at both ends" if cond else "of selected variables"),
        )
        netarg(p)
        if cond:
            p.add_argument("--side", required=True, help="comma-separated side variables")
        p.add_argument("--vars", default=None, help="comma-separated variables (default: all non-side)")
        p.add_argument("--distortion", default="hamming", choices=["hamming", "squared"])
        g = p.add_mutually_exclusive_group()
        g.add_argument("--targets", default=None, help="per-variable distortion targets")
        g.add_argument("--slopes", default=None, help="per-variable slopes (<= 0)")
        g.add_argument("--sweep", type=int, default=25, help="points on a common-slope curve sweep")
        p.add_argument("-o", "--output", default=None)
        p.set_defaults(fn=fn)

    p = sub.add_parser("rd-closed-form", help="closed-form conditional rate-distortion values")
    p.add_argument("family", choices=["binary", "gaussian"])
    p.add_argument("params", type=float, nargs="+",
                   help="binary: P D;  gaussian: SIGMA R D")
    p.set_defaults(fn=cmd_rd_closed_form)

    p = sub.add_parser("bounds", help="sandwich the joint rate between marginal and conditional sums")
    netarg(p)
    p.add_argument("--targets", required=True, help="per-variable distortion targets (id order)")
    p.add_argument("--distortion", default="hamming", choices=["hamming", "squared"])
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("lemma2", help="joint vs per-block conditional rates given a side set")
    netarg(p)
    p.add_argument("--side", required=True, help="comma-separated side variables")
    p.add_argument("--targets", required=True, help="targets for non-side variables (id order)")
    p.add_argument("--distortion", default="hamming", choices=["hamming", "squared"])
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=cmd_lemma2)

    return ap


def run(argv=None) -> int:
    """Parse and dispatch; returns the process exit code."""
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        guard = resolve_size_guard(
            int(os.environ["SEMRD_SIZE_GUARD"]) if "SEMRD_SIZE_GUARD" in os.environ else None
        )
    except (ValueError, SizeGuardError) as e:
        print(f"semrd: bad SEMRD_SIZE_GUARD: {e}", file=sys.stderr)
        return 2
    try:
        n_params = {"binary": 2, "gaussian": 3}
        if args.command == "rd-closed-form" and len(args.params) != n_params[args.family]:
            raise argparse.ArgumentTypeError(
                f"{args.family} needs {n_params[args.family]} parameters"
            )
        return args.fn(RunConfig(args, guard))
    except argparse.ArgumentTypeError as e:
        print(f"semrd: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"semrd: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
