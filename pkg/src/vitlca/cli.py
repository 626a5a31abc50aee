"""Command-line harness: build-dict, gramian, evaluate, cost, synth.

Exit codes: 0 success, 1 validation/configuration error, 2 runtime error
(including a divergence count above zero during evaluation).
"""

from __future__ import annotations

import argparse
import sys

from . import costmodel, embedset, lca, synth
from .costmodel import CostReport
from .errors import DivergenceError, FormatError, ValidationError, VitLcaError
from .evaluate import RunConfig, evaluate
from .lca import LcaParams


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="threshold_lambda", type=float, default=2.0,
                   help="activation threshold (default 2)")
    p.add_argument("--tau", type=float, default=100.0, help="leak time constant (default 100)")
    p.add_argument("--steps", type=int, default=100, help="solver steps K (default 100)")
    p.add_argument("--dt", type=float, default=1.0, help="Euler step size (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vitlca",
                                     description="Exemplar LCA sparse-coding classifier")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-dict", help="build a dictionary from a .vlca training set")
    p.add_argument("train", help="training .vlca file")
    p.add_argument("out", help="output .vdic dictionary file")

    p = sub.add_parser("gramian", help="compute and cache the Gramian of a dictionary")
    p.add_argument("dict", help=".vdic dictionary file")
    p.add_argument("out", help="output .gram cache file")

    p = sub.add_parser("evaluate", help="classify a .vlca test set and report accuracy/cost")
    p.add_argument("dict", help=".vdic dictionary file")
    p.add_argument("test", help="test .vlca file")
    p.add_argument("--gram", help=".gram cache (recomputed when omitted)")
    _add_solver_flags(p)
    p.add_argument("--decoder", choices=["max", "maxsum", "both"], default="both")
    p.add_argument("--signed-max", action="store_true",
                   help="use raw activations in the max-activation decoder")
    p.add_argument("--normalize-input", action="store_true",
                   help="l2-normalize test inputs before encoding")
    p.add_argument("--fallback-most-atoms", action="store_true",
                   help="predict the class with most atoms on all-zero codes")
    p.add_argument("--jpf", type=float, default=costmodel.DEFAULT_JOULES_PER_FLOP,
                   help="joules per FLOP for the energy estimate")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", help="write a line-delimited JSON report here")

    p = sub.add_parser("cost", help="evaluate the analytic cost model only")
    p.add_argument("--m", type=int, required=True, help="dictionary size M")
    p.add_argument("--n", type=int, required=True, help="embedding length N")
    p.add_argument("--k", type=int, required=True, help="solver steps K")
    p.add_argument("--m-hat", type=int, required=True, help="average active neurons")
    p.add_argument("--jpf", type=float, default=costmodel.DEFAULT_JOULES_PER_FLOP)

    p = sub.add_parser("synth", help="generate a clustered synthetic .vlca set")
    p.add_argument("out", help="output .vlca file")
    p.add_argument("--clusters", type=int, required=True)
    p.add_argument("--per-cluster", type=int, required=True)
    p.add_argument("--n-dim", type=int, required=True)
    p.add_argument("--spread", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)

    return parser


def cmd_build_dict(args) -> int:
    train = embedset.load_embedding_set(args.train)
    dictionary = lca.build_dictionary(train)
    lca.save_dictionary(dictionary, args.out)
    print(f"dictionary written: M={dictionary.size} N={dictionary.n_dim} "
          f"C={dictionary.n_classes} -> {args.out}")
    return 0


def cmd_gramian(args) -> int:
    dictionary = lca.load_dictionary(args.dict)
    gram = lca.compute_gramian(dictionary)
    lca.save_gramian(gram, args.out)
    flops = costmodel.training_flops(dictionary.size, dictionary.n_dim)
    print(f"gramian written: M={gram.size} -> {args.out}")
    print(f"training_flops = {flops}")
    return 0


def cmd_evaluate(args) -> int:
    dictionary = lca.load_dictionary(args.dict)
    test = embedset.load_embedding_set(args.test)
    if args.gram:
        gram = lca.load_gramian(args.gram, expected_size=dictionary.size)
    else:
        gram = lca.compute_gramian(dictionary)
    config = RunConfig(
        params=LcaParams(
            threshold_lambda=args.threshold_lambda,
            leak_tau=args.tau,
            n_steps=args.steps,
            step_size=args.dt,
        ),
        signed_max=args.signed_max,
        normalize_input=args.normalize_input,
        fallback_most_atoms=args.fallback_most_atoms,
        joules_per_flop=args.jpf,
        workers=args.workers,
        seed=args.seed,
    )
    report = evaluate(dictionary, gram, test, config)
    if args.decoder in ("max", "both"):
        print(f"top1 accuracy (max)    = {report.top1_accuracy_max:.4f}")
    if args.decoder in ("maxsum", "both"):
        print(f"top1 accuracy (maxsum) = {report.top1_accuracy_maxsum:.4f}")
    print(f"mean active count      = {report.mean_active_count:.3f}")
    print(f"no-evidence records    = {report.no_evidence_count}")
    print(f"divergent records      = {report.divergent_count}")
    print("-- cost model --")
    print(report.cost.to_text())
    if args.report:
        report.write_jsonl(args.report)
    return 2 if report.divergent_count > 0 else 0


def cmd_cost(args) -> int:
    report = CostReport.build(args.m, args.n, args.k, args.m_hat, args.jpf)
    print(report.to_text())
    return 0


def cmd_synth(args) -> int:
    es = synth.make_clustered_set(
        n_clusters=args.clusters,
        per_cluster=args.per_cluster,
        n_dim=args.n_dim,
        spread=args.spread,
        seed=args.seed,
    )
    embedset.save_embedding_set(es, args.out)
    print(f"synthetic set written: M={len(es)} N={es.n_dim} C={es.n_classes} -> {args.out}")
    return 0


_COMMANDS = {
    "build-dict": cmd_build_dict,
    "gramian": cmd_gramian,
    "evaluate": cmd_evaluate,
    "cost": cmd_cost,
    "synth": cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValidationError, FormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (DivergenceError, VitLcaError, OSError) as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
