"""Command-line entry point.

Subcommands: extract, evaluate, stats, explain, synth, report. Every run
writes a run_config.json echo into its output directory; all randomness
derives from --seed, and --jobs never changes any output byte.
"""

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .config import AnalysisConfig, load_config_file
from .corpus import load_manifest
from .errors import DataError, UsageError, VoicemarkersError
from .features import (ACOUSTIC_NAMES, build_dataset, extract_features,
                       load_features_csv, save_features_csv)
from .figures import save_svg, svg_bar, svg_box, svg_scatter
from .learn import make_fold_plan, nested_cv
from .learn.folds import FoldPlan
from .learn.nested import EvalReport
from .learn.spaces import ALGORITHMS
from .explain import attribute_report, common_features, selection_frequency
from .stats import feature_stats, significance_marker
from . import synthlab

log = logging.getLogger("voicemarkers")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _echo_config(out_dir, command, args, overrides):
    os.makedirs(out_dir, exist_ok=True)
    doc = {
        "command": command,
        "version": __version__,
        "seed": args.seed,
        "jobs": args.jobs,
        "config_overrides": overrides,
        "arguments": {k: v for k, v in sorted(vars(args).items())
                      if k not in ("func",)},
    }
    path = os.path.join(out_dir, "run_config.json")
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=str)
    return path


def _analysis_config(args):
    overrides = {}
    if args.config:
        overrides = load_config_file(args.config)
    return AnalysisConfig().apply_overrides(overrides), overrides


def _extract_one(payload):
    record, overrides = payload
    config = AnalysisConfig().apply_overrides(overrides)
    try:
        return extract_features(record, config=config), ""
    except DataError as exc:
        return None, str(exc)


def cmd_extract(args):
    config, overrides = _analysis_config(args)
    records = load_manifest(args.manifest)
    audio = [r for r in records if r.condition in ("cognitive", "daily")]
    if not audio:
        raise DataError("manifest has no audio responses to extract")
    _echo_config(args.out, "extract", args, overrides)

    payloads = [(r, overrides) for r in audio]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_extract_one, payloads, chunksize=4))
    else:
        results = [_extract_one(p) for p in payloads]

    vectors, skips = [], []
    for record, (vec, reason) in zip(audio, results):
        if vec is None:
            skips.append((record.participant_id, record.question_id, reason))
        else:
            vectors.append(vec)
    if not vectors:
        raise DataError("every response failed feature extraction")

    out_csv = os.path.join(args.out, "features.csv")
    save_features_csv(vectors, out_csv)
    with open(os.path.join(args.out, "extract_skips.txt"), "w") as fh:
        for pid, qid, reason in skips:
            fh.write("%s\t%s\t%s\n" % (pid, qid, reason))
    log.info("extracted %d rows (%d skipped) -> %s", len(vectors),
             len(skips), out_csv)
    return 0


def _load_condition_dataset(args, condition):
    records = load_manifest(args.manifest)
    if condition == "neuropsych":
        return build_dataset(records, "neuropsych")
    if not args.features:
        raise UsageError("--features is required for condition %r "
                         "(run extract first)" % condition)
    vectors = load_features_csv(args.features)
    return build_dataset(records, condition, vectors=vectors)


def cmd_evaluate(args):
    _, overrides = _analysis_config(args)
    algorithms = args.algorithms.split(",")
    for alg in algorithms:
        if alg not in ALGORITHMS:
            raise UsageError("unknown algorithm %r (choices: %s)"
                             % (alg, ", ".join(ALGORITHMS)))
    dataset = _load_condition_dataset(args, args.condition)
    _echo_config(args.out, "evaluate", args, overrides)

    plan = make_fold_plan(dataset, args.seed)
    plan.to_json(os.path.join(args.out, "fold_plan.json"))

    rows = []
    for alg in algorithms:
        report = nested_cv(dataset, alg, plan, budget=args.budget,
                           seed=args.seed, jobs=args.jobs,
                           boruta_max_iter=args.boruta_iter)
        report.to_json(os.path.join(args.out, "eval_%s.json" % alg))
        if not report.leakage_free():
            raise VoicemarkersError("leakage audit failed for %s" % alg)
        rows.append(report.summary_row())
        log.info("%s: %s", alg, report.metrics())

    with open(os.path.join(args.out, "summary.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["algorithm", "accuracy", "sensitivity", "specificity",
                    "f1"])
        w.writerows(rows)
    return 0


def cmd_stats(args):
    _, overrides = _analysis_config(args)
    records = load_manifest(args.manifest)
    vectors = load_features_csv(args.features)
    present = sorted({v.condition for v in vectors})
    datasets = [build_dataset(records, cond, vectors=vectors)
                for cond in present if cond in ("cognitive", "daily")]
    if not datasets:
        raise DataError("feature table has no cognitive or daily rows")
    _echo_config(args.out, "stats", args, overrides)

    report = feature_stats(datasets, ACOUSTIC_NAMES)
    report.to_json(os.path.join(args.out, "stats.json"))
    report.to_csv(os.path.join(args.out, "stats.csv"))

    for ds in datasets:
        cond_rows = [r for r in report.rows if r["condition"] == ds.condition]
        top = sorted(cond_rows, key=lambda r: (r["eta_p_adj"],
                                               r["feature"]))[:6]
        name_idx = {n: j for j, n in enumerate(ds.feature_names)}
        boxes = []
        for r in top:
            col = ds.X[:, name_idx[r["feature"]]]
            boxes.append((r["feature"], col[ds.y == 0].tolist(),
                          col[ds.y == 1].tolist(),
                          significance_marker(r["eta_p_adj"])))
        save_svg(svg_box(boxes, "group contrasts (%s)" % ds.condition),
                 os.path.join(args.out, "fig_box_%s.svg" % ds.condition))

    if len(datasets) == 2 and report.agreement:
        a, b = report.conditions
        ra = [r["rho"] for r in report.rows if r["condition"] == a]
        rb = [r["rho"] for r in report.rows if r["condition"] == b]
        agr = report.agreement["rho"]
        save_svg(svg_scatter(ra, rb, "rho (%s)" % a, "rho (%s)" % b,
                             "cross-condition agreement",
                             "Spearman rho=%.3f%s" %
                             (agr["rho"], significance_marker(agr["p"]))),
                 os.path.join(args.out, "fig_agreement.svg"))
    return 0


def _explain_one(args, eval_path):
    report = EvalReport.from_json(eval_path)
    plan_path = args.plan or os.path.join(os.path.dirname(eval_path),
                                          "fold_plan.json")
    if not os.path.exists(plan_path):
        raise UsageError("fold plan not found at %s (pass --plan)"
                         % plan_path)
    plan = FoldPlan.from_json(plan_path)
    dataset = _load_condition_dataset(args, report.condition or "cognitive")
    if tuple(dataset.feature_names) != tuple(report.feature_names):
        raise DataError("feature namespace mismatch between the dataset and "
                        "the evaluation report")
    imp = attribute_report(dataset, plan, report,
                           n_permutations=args.n_permutations,
                           background_size=args.background,
                           seed=args.seed)
    return report, imp


def cmd_explain(args):
    _, overrides = _analysis_config(args)
    _echo_config(args.out, "explain", args, overrides)
    results = [_explain_one(args, path) for path in args.eval]

    rank_docs = []
    for report, imp in results:
        cond = report.condition or "cond%d" % len(rank_docs)
        imp.to_json(os.path.join(args.out, "importance_%s.json" % cond))
        imp.to_csv(os.path.join(args.out, "importance_%s.csv" % cond))
        rank_docs.append([
            {"feature": name, "robust": name in imp.robust,
             "mean_abs_shap": imp.mean_abs_shap[name]}
            for name in imp.feature_names])

    highlight = ()
    fractions = None
    if len(results) == 2:
        common, fractions = common_features(*rank_docs)
        highlight = tuple(common)
        with open(os.path.join(args.out, "common_features.json"), "w") as fh:
            json.dump({"common": list(common),
                       "fractions": {results[0][0].condition: fractions[0],
                                     results[1][0].condition: fractions[1]}},
                      fh, indent=2, sort_keys=True)

    for report, imp in results:
        cond = report.condition or "cond"
        ranked = imp.ranking()[:12]
        items = [(name, imp.mean_abs_shap[name]) for name in ranked]
        save_svg(svg_bar(items, "mean |Shapley| (%s)" % cond,
                         highlight=highlight or imp.robust),
                 os.path.join(args.out, "fig_shap_%s.svg" % cond))
    return 0


def cmd_synth(args):
    _echo_config(args.out, "synth", args, {})
    if args.spec:
        with open(args.spec) as fh:
            doc = json.load(fh)
        doc.setdefault("seed", args.seed)
        spec = synthlab.CorpusSpec(**doc)
    else:
        n_high = args.high
        if n_high is None:
            # keep the 32:54 class balance when the census is overridden
            n_high = max(1, round(args.participants * 32 / 54))
        maker = (synthlab.effect_corpus_spec if args.preset == "effect"
                 else synthlab.null_corpus_spec)
        spec = maker(seed=args.seed, n_participants=args.participants,
                     n_high=n_high, duration=args.duration)
    manifest = synthlab.synth_corpus(spec, args.out)
    log.info("corpus written: %s", manifest)
    return 0


def cmd_report(args):
    """Corpus in, full analysis out: extract, evaluate, stats, explain."""
    _, overrides = _analysis_config(args)
    _echo_config(args.out, "report", args, overrides)

    features_csv = os.path.join(args.out, "extract", "features.csv")
    if not os.path.exists(features_csv):
        ex_args = argparse.Namespace(**vars(args))
        ex_args.out = os.path.join(args.out, "extract")
        cmd_extract(ex_args)
    args.features = features_csv

    records = load_manifest(args.manifest)
    vectors = load_features_csv(features_csv)
    conditions = [c for c in ("cognitive", "daily")
                  if any(v.condition == c for v in vectors)]
    if any(r.neuropsych for r in records):
        conditions.append("neuropsych")

    summary = {}
    best = {}
    skipped = {}
    for cond in conditions:
        sub = argparse.Namespace(**vars(args))
        sub.condition = cond
        sub.out = os.path.join(args.out, "eval_%s" % cond)
        try:
            cmd_evaluate(sub)
        except DataError as exc:
            # a sparse condition should not sink the whole report
            log.warning("skipping %s evaluation: %s", cond, exc)
            skipped[cond] = str(exc)
            continue
        rows = {}
        for alg in args.algorithms.split(","):
            rep = EvalReport.from_json(os.path.join(sub.out,
                                                    "eval_%s.json" % alg))
            rows[alg] = rep.metrics()
        summary[cond] = rows
        best[cond] = max(rows, key=lambda a: (rows[a]["accuracy"], a))

    st_args = argparse.Namespace(**vars(args))
    st_args.out = os.path.join(args.out, "stats")
    cmd_stats(st_args)

    ex_conditions = [c for c in conditions
                     if c != "neuropsych" and c in best]
    if ex_conditions:
        xp_args = argparse.Namespace(**vars(args))
        xp_args.out = os.path.join(args.out, "explain")
        xp_args.eval = [os.path.join(args.out, "eval_%s" % c,
                                     "eval_%s.json" % best[c])
                        for c in ex_conditions]
        xp_args.plan = None
        cmd_explain(xp_args)

    with open(os.path.join(args.out, "report.json"), "w") as fh:
        json.dump({"metrics": summary, "best_algorithm": best,
                   "skipped_conditions": skipped},
                  fh, indent=2, sort_keys=True)
    return 0


def _build_parser():
    parser = _Parser(prog="voicemarkers",
                     description="speech-marker extraction and evaluation")
    parser.add_argument("--version", action="version", version=__version__)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--config", default=None,
                        help="JSON file of analysis-parameter overrides")
    common.add_argument("--verbose", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[common],
                       help="feature table from a manifest of recordings")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("evaluate", parents=[common],
                       help="nested cross-validation for one condition")
    p.add_argument("--manifest", required=True)
    p.add_argument("--features", default=None)
    p.add_argument("--condition", required=True,
                   choices=("cognitive", "daily", "neuropsych"))
    p.add_argument("--algorithms", default=",".join(ALGORITHMS))
    p.add_argument("--budget", type=int, default=50)
    p.add_argument("--boruta-iter", type=int, default=20, dest="boruta_iter")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", parents=[common],
                       help="association battery and figures")
    p.add_argument("--manifest", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("explain", parents=[common],
                       help="selection frequency and Shapley attribution")
    p.add_argument("--manifest", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--eval", nargs="+", required=True,
                   help="one or two eval_<algorithm>.json paths")
    p.add_argument("--plan", default=None)
    p.add_argument("--n-permutations", type=int, default=200,
                   dest="n_permutations")
    p.add_argument("--background", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("synth", parents=[common],
                       help="generate a ground-truth synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--preset", choices=("effect", "null"), default="effect")
    p.add_argument("--spec", default=None,
                   help="JSON file with CorpusSpec fields (overrides preset)")
    p.add_argument("--participants", type=int, default=54)
    p.add_argument("--high", type=int, default=None,
                   help="participants in the high-concern group")
    p.add_argument("--duration", type=float, default=3.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("report", parents=[common],
                       help="extract + evaluate + stats + explain in one run")
    p.add_argument("--manifest", required=True)
    p.add_argument("--algorithms", default=",".join(ALGORITHMS))
    p.add_argument("--budget", type=int, default=50)
    p.add_argument("--boruta-iter", type=int, default=20, dest="boruta_iter")
    p.add_argument("--n-permutations", type=int, default=200,
                   dest="n_permutations")
    p.add_argument("--background", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s")
        np.seterr(over="ignore", under="ignore")
        return args.func(args)
    except UsageError as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        return 1
    except DataError as exc:
        print("data error: %s" % exc, file=sys.stderr)
        return 2
    except VoicemarkersError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - defensive
        print("internal error: %s: %s" % (type(exc).__name__, exc),
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
