"""Command-line interface.

Exit codes: 0 success, 1 reproduction mismatch, 2 input or argument error,
3 violated invariant.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io as kio
from .errors import (
    BadParams,
    DegenerateSet,
    DimensionMismatch,
    InvalidKernel,
    MHRevError,
    NonPositiveStationary,
    ReducibleChain,
    TooLarge,
)
from .kernels import StochasticKernel, stationary_distribution
from .metastability import (
    Partition,
    cheeger_bounds,
    conductance,
    conductance_profile,
    leakage_bounds,
    metastability_bounds,
)
from .models import (
    asymmetric_cycle,
    dhn_sampler,
    torus_walk,
    triangle,
    upward_skip_free,
    winning_streak,
)
from .reproduce import TARGETS, checks_table, run_target, write_outputs
from .reversiblize import additive_reversiblization, mh_pair, multiplicative_reversiblization
from .spectra import mh_spectral_gap
from .svg import line_plot

MODELS = ("triangle", "dhn", "ws", "cycle", "torus", "skipfree")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", choices=MODELS, help="built-in chain")
    src.add_argument("--input", help="kernel file (.json or .csv)")
    p.add_argument("--m", type=int, default=3, help="size parameter for dhn and ws")
    p.add_argument("--n", type=int, default=5, help="cycle length for cycle and torus")
    p.add_argument("--d", type=int, default=2, help="torus dimension")
    p.add_argument("--p", type=float, default=0.8, help="forward step probability for cycle and torus")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mhrev", description="Spectral analysis of non-reversible Markov chains through MH reversiblizations.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    g = sub.add_parser("gaps", help="scan k = 1..n_max for the MH and pseudo-spectral gaps")
    _add_source(g)
    g.add_argument("--n-max", type=int, default=100)
    g.add_argument("--tol", type=float, default=1e-9)
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--out", help="write report here instead of stdout")
    g.add_argument("--svg", help="also write a plot of the per-k curves")

    r = sub.add_parser("reversiblize", help="write M1, M2, the additive or the multiplicative reversiblization")
    _add_source(r)
    r.add_argument("which", choices=("m1", "m2", "additive", "mult"))
    r.add_argument("--k", type=int, default=1, help="power for the multiplicative reversiblization")
    r.add_argument("--format", choices=("json", "csv"), default="json")
    r.add_argument("--out")

    m = sub.add_parser("metastable", help="metastability, leakage and conductance report for a partition")
    _add_source(m)
    m.add_argument("--partition", required=True, help="blocks separated by '|', states by ',', e.g. 0,1|2,3")
    m.add_argument("--k", type=int, default=2, help="order of the k-way expansion")
    m.add_argument("--t", type=int, default=1, help="time for the leakage of the first block")
    m.add_argument("--format", choices=("json",), default="json")
    m.add_argument("--out")

    rp = sub.add_parser("reproduce", help="recompute a published example and compare")
    rp.add_argument("target", choices=TARGETS)
    rp.add_argument("--out", "--outdir", dest="outdir", default="reproduce_out", help="output directory")
    return parser


def load_chain(args):
    """(kernel, state names) from --model or --input."""
    if args.input:
        kernel, states = kio.read_kernel(args.input)
        if not isinstance(kernel, StochasticKernel):
            raise kio.KernelFileError("analyses need a stochastic kernel")
        return kernel, states
    name = args.model
    if name == "triangle":
        P = triangle()
    elif name == "dhn":
        P = dhn_sampler(args.m)
    elif name == "ws":
        P = winning_streak(args.m)
    elif name == "cycle":
        P = asymmetric_cycle(args.n, args.p)
    elif name == "torus":
        P = torus_walk(args.n, args.d, args.p)
    else:
        P = upward_skip_free()
    return P, [str(i) for i in range(P.n)]


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_gaps(args) -> int:
    P, _ = load_chain(args)
    pi = stationary_distribution(P)
    scan = mh_spectral_gap(P, pi, args.n_max, tol=args.tol)
    footer = {
        "n_max": scan.n_max,
        "gamma_MH": scan.gamma_MH,
        "beta_MH": scan.beta_MH,
        "gamma_ps": scan.gamma_ps,
        "gamma_ps_k": scan.ps_argmax,
        "t_star": scan.t_star,
        "C_complement": sorted(scan.C_complement),
        "converged": scan.converged,
    }
    if args.format == "json":
        doc = dict(footer)
        doc["per_k"] = [
            {
                "k": r.k,
                "Lambda_M1_root": r.Lambda_M1_root,
                "abs_lambda_M2_root": r.abs_lambda_M2_root,
                "ps_term": r.ps_term,
                "in_C": r.in_C,
            }
            for r in scan.per_k
        ]
        text = kio.to_json(doc)
    else:
        rows = [(r.k, r.Lambda_M1_root, r.abs_lambda_M2_root, r.ps_term, int(r.in_C)) for r in scan.per_k]
        text = kio.rows_to_csv(("k", "Lambda_M1_root", "abs_lambda_M2_root", "ps_term", "in_C"), rows)
        text += "".join(
            f"# {k},{kio.fmt(v) if isinstance(v, float) else (' '.join(map(str, v)) if isinstance(v, list) else v)}\n"
            for k, v in footer.items()
        )
    _emit(text, args.out)
    if args.svg:
        ks = [r.k for r in scan.per_k]
        Path(args.svg).write_text(line_plot(
            {"1 - max(|lambda(M2)|^(1/k), Lambda(M1)^(1/k))": (ks, [1.0 - r.mh_term for r in scan.per_k]),
             "gamma(P*^k P^k)/k": (ks, [r.ps_term for r in scan.per_k])},
            title="Gap scan", ylabel="value",
        ))
    return 0


def cmd_reversiblize(args) -> int:
    P, states = load_chain(args)
    pi = stationary_distribution(P)
    if args.which in ("m1", "m2"):
        K = mh_pair(P, pi)[0 if args.which == "m1" else 1]
    elif args.which == "additive":
        K = additive_reversiblization(P, pi)
    else:
        K = multiplicative_reversiblization(P, args.k, pi)
    text = kio.kernel_to_json(K, states) if args.format == "json" else kio.kernel_to_csv(K)
    _emit(text, args.out)
    return 0


def _parse_partition(spec: str, states) -> Partition:
    """Blocks as state names, falling back to 0-based indices."""
    index = {name: i for i, name in enumerate(states)}
    blocks = []
    for block in spec.split("|"):
        cur = []
        for tok in (t.strip() for t in block.split(",")):
            if not tok:
                continue
            if tok in index:
                cur.append(index[tok])
            elif tok.isdigit():
                cur.append(int(tok))
            else:
                raise UsageError(f"unknown state {tok!r} in partition {spec!r}")
        blocks.append(cur)
    n = len(states)
    try:
        return Partition(blocks, n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_metastable(args) -> int:
    P, states = load_chain(args)
    pi = stationary_distribution(P)
    D = _parse_partition(args.partition, states)
    b = metastability_bounds(P, pi, D)
    doc = {
        "partition": [[states[i] for i in sorted(blk)] for blk in D],
        "metastability": b.value,
        "lower": b.lower,
        "upper": b.upper,
        "rho": list(b.rho),
        "a": b.a,
        "c": b.c,
        "conductance": {",".join(states[i] for i in sorted(blk)): conductance(P, pi, blk) for blk in D},
    }
    if P.n <= 10 and 2 <= args.k <= P.n:
        ch = cheeger_bounds(P, pi, args.k)
        doc["k_way_expansion"] = {
            "k": args.k,
            "value": conductance_profile(P, pi, args.k),
            "cheeger_lower": ch.lower,
            "cheeger_upper_advisory": ch.upper,
        }
    if len(D) == 2:
        lb = leakage_bounds(P, pi, sorted(D.blocks[0]), args.t, strict=False)
        doc["leakage"] = {
            "t": args.t,
            "set": [states[i] for i in sorted(D.blocks[0])],
            "value": lb.value,
            "lower": lb.lower,
            "upper": lb.upper,
            "upper_certified": lb.upper_certified,
        }
    _emit(kio.to_json(doc), args.out)
    return 0


def cmd_reproduce(args) -> int:
    res = run_target(args.target)
    write_outputs(res, args.outdir)
    sys.stdout.write(checks_table(res))
    if not res.ok:
        failed = [c for c in res.checks if c.fatal and not c.passed]
        sys.stderr.write(f"{args.target}: {len(failed)} mismatch(es)\n")
        for c in failed:
            sys.stderr.write(f"  {c.name}: expected {c.expected}, computed {c.computed}, tol {c.tol}\n")
        return 1
    return 0


COMMANDS = {
    "gaps": cmd_gaps,
    "reversiblize": cmd_reversiblize,
    "metastable": cmd_metastable,
    "reproduce": cmd_reproduce,
}

# errors that mean the input itself is unusable rather than a broken invariant
_INPUT_ERRORS = (InvalidKernel, ReducibleChain, NonPositiveStationary, DimensionMismatch,
                 BadParams, TooLarge, DegenerateSet)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"mhrev: error: {exc}\n")
        return 2
    except MHRevError as exc:
        name = type(exc).__name__
        if isinstance(exc, _INPUT_ERRORS):
            sys.stderr.write(f"mhrev: input error ({name}): {exc}\n")
            return 2
        sys.stderr.write(f"mhrev: invariant violated ({name}): {exc}\n")
        return 3
    except ValueError as exc:
        sys.stderr.write(f"mhrev: error: {exc}\n")
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
