"""``tcplda`` command line: train, synth, score, inspect.

Exit codes: 0 success, 1 data or model error, 2 usage error.
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from tcplda import formats
from tcplda.em import INITS, VARIANTS, TrainConfig, em_train
from tcplda.errors import FormatError, PldaError
from tcplda.scoring import enroll, score_llr
from tcplda.spd import pivots_squared
from tcplda.synth import SynthSpec, generate

log = logging.getLogger("tcplda")


def _int_at_least(lo):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
        if value < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {value}")
        return value

    return parse


def _nonneg_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def cmd_train(args):
    data = formats.read_embeddings(args.data)
    config = TrainConfig(iterations=args.iters, variant=args.variant, init=args.init, tolerance=args.tol)
    model, report = em_train(data, config)
    formats.write_model(args.out, model)
    if args.report:
        formats.write_report(args.report, report)
    for ev in report.jitter_events:
        log.warning("iteration %d: jitter %.3g added to %s", ev.iteration, ev.amount, ev.matrix)
    return 0


def cmd_synth(args):
    d = args.dim
    phi_b = formats.read_matrix(args.phi_b, d) if args.phi_b else np.eye(d)
    phi_w = formats.read_matrix(args.phi_w, d) if args.phi_w else np.eye(d)
    spec = SynthSpec(np.zeros(d), phi_b, phi_w, args.classes, args.per_class, args.seed)
    formats.write_embeddings(args.out, generate(spec))
    return 0


def cmd_score(args):
    model = formats.read_model(args.model)
    enroll_data = formats.read_embeddings(args.enroll)
    test_data = formats.read_embeddings(args.test)
    trials = formats.read_trials(args.trials)
    enrolled = {}
    known = set(enroll_data.labels)
    lines = []
    for lineno, enroll_id, idx in trials:
        if enroll_id not in known:
            raise FormatError(f"{args.trials}: unknown enrollment id {enroll_id!r}", lineno)
        if not 0 <= idx < len(test_data):
            raise FormatError(f"{args.trials}: test index {idx} out of range [0, {len(test_data)})", lineno)
        if enroll_id not in enrolled:
            enrolled[enroll_id] = enroll(model, enroll_data.select(enroll_id))
        llr = score_llr(model, enrolled[enroll_id], test_data.vectors[idx])
        lines.append(f"{enroll_id}\t{idx}\t{llr:.9g}\n")
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(lines)
    return 0


def cmd_inspect(args):
    model = formats.read_model(args.model)
    out = [("dim", model.dim)]
    for name in ("phi_b", "phi_w"):
        mat = getattr(model, name)
        piv = pivots_squared(mat)
        out += [
            (f"{name}_trace", np.trace(mat)),
            (f"{name}_min_pivot2", piv.min()),
            (f"{name}_max_pivot2", piv.max()),
        ]
    out.append(("mu_norm", np.linalg.norm(model.mu)))
    for key, value in out:
        print(f"{key}\t{value:.9g}" if key != "dim" else f"{key}\t{value}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="tcplda", description="Two-covariance PLDA tools")
    parser.add_argument("-v", "--verbose", action="store_true", help="log EM progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model from an embedding file")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--iters", type=_int_at_least(1), default=10)
    p.add_argument("--variant", choices=VARIANTS, default="kaldi")
    p.add_argument("--init", choices=INITS, default="data-split")
    p.add_argument("--tol", type=_nonneg_float, default=0.0)
    p.add_argument("--report", help="write '<iter>\\t<loglik>' per iteration")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("synth", help="sample a synthetic embedding file")
    p.add_argument("--dim", type=_int_at_least(1), required=True)
    p.add_argument("--classes", type=_int_at_least(2), required=True)
    p.add_argument("--per-class", type=_int_at_least(1), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--phi-b", help="between-class covariance, one row per line (default I)")
    p.add_argument("--phi-w", help="within-class covariance, one row per line (default I)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("score", help="score a trial list")
    p.add_argument("--model", required=True)
    p.add_argument("--enroll", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--trials", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("inspect", help="print summary statistics of a model")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="tcplda: %(levelname)s: %(message)s",
    )
    try:
        return args.func(args)
    except (PldaError, OSError) as exc:
        print(f"tcplda {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
