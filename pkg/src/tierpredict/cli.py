"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 internal
invariant violation. Every command writes a ``manifest.json`` (or
``<out>.manifest.json`` for single-file outputs) listing flags, seeds and
SHA-256 digests of its inputs and outputs. Paths inside the manifest are
recorded by base name or relative to the output directory, so identical runs
into different directories produce identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__, classifiers
from .classifiers import FAMILY_NAMES, ModelError
from .correlation import (
    DEFAULT_THRESHOLD,
    CorrelationError,
    dataset_correlations,
    emit_heatmap,
    select_features,
    write_selection,
)
from .dataset import TARGET, DatasetError, default_config, generate_synthetic, load_config, load_csv, validate, write_csv
from .evaluation import format_table
from .labels import CLASSES
from .pipeline import FAMILY_ORDER, train_families
from .preprocess import SchemaError, apply_transform, derive_labels
from .tiering import (
    Tier,
    aggregate_survey,
    compare_cohorts,
    generate_plan,
    load_plans,
    read_survey_csv,
    write_survey_csv,
)

log = logging.getLogger("tierpredict")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
DATA_ERRORS = (DatasetError, SchemaError, CorrelationError, ModelError, FileNotFoundError, ValueError, KeyError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(path: Path, command: str, flags: dict[str, Any], inputs: Sequence[Path], artifacts: dict[str, Path], seeds: dict[str, int] | None = None) -> None:
    manifest = {
        "tool": "tierpredict",
        "version": __version__,
        "command": command,
        "flags": flags,
        "seeds": seeds or {},
        "inputs": {p.name: _sha256(p) for p in inputs},
        "artifacts": {name: _sha256(p) for name, p in sorted(artifacts.items())},
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_rows(path: Path, header: Sequence[str], rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _f6(v: float) -> str:
    return f"{v:.6f}"


# -- commands ---------------------------------------------------------------


def cmd_generate(args) -> int:
    if args.n < 0:
        raise UsageError("--n must be >= 0")
    if args.seed < 0:
        raise UsageError("--seed must be >= 0")
    overrides = {"n": args.n, "seed": args.seed}
    if args.missing_rate is not None:
        overrides["missing_rate"] = args.missing_rate
    cfg = load_config(args.config, **overrides) if args.config else default_config(**overrides)
    ds = generate_synthetic(cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(ds, out)
    inputs = [Path(args.config)] if args.config else []
    flags = {"n": args.n, "seed": args.seed, "out": out.name, "config": Path(args.config).name if args.config else None,
             "missing_rate": cfg.missing_rate, "config_digest": cfg.digest()}
    _write_manifest(out.with_name(out.name + ".manifest.json"), "generate", flags, inputs, {out.name: out}, {"seed": args.seed})
    print(f"wrote {len(ds)} records to {out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    data = Path(args.data)
    ds = load_csv(data)
    report = validate(ds)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cm = dataset_correlations(ds)
    csv_path, svg_path = emit_heatmap(cm, out_dir)
    override = [c.strip() for c in args.override.split(",")] if args.override else None
    sel = select_features(cm, TARGET, args.threshold, override)
    sel_path = out_dir / "selection.json"
    write_selection(sel, sel_path)
    val_path = out_dir / "validation.json"
    val_path.write_text(
        json.dumps({"missing": report.missing, "range_violations": report.range_violations, "duplicate_ids": report.duplicate_ids}, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    if not sel.selected:
        print(f"warning: no feature reaches |r| >= {args.threshold}; selection is empty", file=sys.stderr)
    if cm.excluded:
        print(f"warning: constant columns excluded: {', '.join(cm.excluded)}", file=sys.stderr)
    artifacts = {p.name: p for p in (csv_path, svg_path, sel_path, val_path)}
    flags = {"data": data.name, "threshold": args.threshold, "override": override}
    _write_manifest(out_dir / "manifest.json", "analyze", flags, [data], artifacts)
    print("selected: " + (", ".join(sel.selected) or "(none)"))
    return EXIT_OK


def _parse_models(spec: str) -> tuple[str, ...]:
    if spec == "all":
        return FAMILY_ORDER
    chosen = tuple(m.strip() for m in spec.split(",") if m.strip())
    unknown = [m for m in chosen if m not in FAMILY_ORDER]
    if unknown or not chosen:
        raise UsageError(f"unknown model(s): {', '.join(unknown) or '(none)'}; choose from {', '.join(FAMILY_ORDER)} or all")
    return tuple(m for m in FAMILY_ORDER if m in chosen)


def cmd_train(args) -> int:
    families = _parse_models(args.models)
    data = Path(args.data)
    ds = load_csv(data)
    if not ds.has_target:
        raise SchemaError(f"training data needs a {TARGET} score for every row")
    run = train_families(
        ds,
        args.seed,
        families,
        features=args.features,
        threshold=args.threshold,
        cv_folds=args.cv_folds or None,
    )
    out = Path(args.out_dir)
    (out / "models").mkdir(parents=True, exist_ok=True)
    (out / "confusion").mkdir(exist_ok=True)
    arts: dict[str, Path] = {}

    def art(rel: str) -> Path:
        arts[rel] = out / rel
        return out / rel

    art("features.json").write_text(
        json.dumps({"features": list(run.features), "split_sizes": list(run.split_sizes), "majority_baseline": run.majority_baseline}, indent=2) + "\n",
        encoding="utf-8",
    )
    grid_rows, cv_rows, curve_rows, cmp_rows = [], [], [], []
    for fam, res in run.results.items():
        classifiers.save_model(res.model, art(f"models/{fam}.json"), run.transform)
        res.test_confusion.to_csv(art(f"confusion/{fam}.csv"))
        for params, acc in res.grid.entries:
            grid_rows.append([fam, params.describe(), _f6(acc), int(params == res.grid.best)])
        if res.cv is not None:
            for metric in ("accuracy", "precision", "recall", "f_measure"):
                cv_rows.append([fam, metric, _f6(res.cv.mean[metric]), _f6(res.cv.std[metric])])
        for frac, acc in res.curve:
            curve_rows.append([fam, _f6(frac), _f6(acc)])
        m = res.test_metrics
        cmp_rows.append([fam, _f6(m.accuracy), _f6(m.precision), _f6(m.recall), _f6(m.f_measure), int(m.zero_division)])
        if fam == "rf":
            imp = classifiers.feature_importances(res.model)
            _write_rows(art("importances.csv"), ["feature", "importance"], [[k, _f6(v)] for k, v in imp.items()])
    _write_rows(art("grid_search.csv"), ["family", "params", "validation_accuracy", "selected"], grid_rows)
    if cv_rows:
        _write_rows(art("cv_report.csv"), ["family", "metric", "mean", "std"], cv_rows)
    if curve_rows:
        _write_rows(art("learning_curve.csv"), ["family", "fraction", "validation_accuracy"], curve_rows)
    _write_rows(art("comparison.csv"), ["family", "accuracy", "precision", "recall", "f_measure", "zero_division"], cmp_rows)
    table = format_table({FAMILY_NAMES[f]: r.test_metrics for f, r in run.results.items()})
    art("comparison.txt").write_text(table, encoding="utf-8")
    flags = {"data": data.name, "seed": args.seed, "models": list(families), "features": args.features,
             "threshold": args.threshold, "cv_folds": args.cv_folds}
    _write_manifest(out / "manifest.json", "train", flags, [data], arts, {"seed": args.seed})
    sys.stdout.write(table)
    return EXIT_OK


def _csv_header(path: Path) -> list[str]:
    with path.open(newline="", encoding="utf-8") as fh:
        return next(csv.reader(fh), [])


def cmd_predict(args) -> int:
    model_path, data = Path(args.model), Path(args.data)
    model, transform = classifiers.load_model(model_path)
    if transform is None:
        raise ModelError(f"{model_path} carries no preprocessing transform")
    if not data.exists():
        raise FileNotFoundError(f"no such file: {data}")
    header = _csv_header(data)
    missing = [c for c in ("student_id",) + transform.columns if c not in header]
    if missing:
        raise SchemaError(f"{data} is missing column(s): {', '.join(missing)}")
    ds = load_csv(data)
    labels = model.predict(apply_transform(transform, ds))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_rows(out, ["student_id", "predicted_tier"], [[sid, CLASSES[c]] for sid, c in zip(ds.ids, labels)])
    flags = {"model": model_path.name, "data": data.name, "out": out.name}
    _write_manifest(out.with_name(out.name + ".manifest.json"), "predict", flags, [model_path, data], {out.name: out})
    print(f"wrote {len(labels)} predictions to {out}")
    return EXIT_OK


def _read_tiers(path: Path, column: str) -> dict[str, str]:
    header = _csv_header(path)
    if TARGET in header:
        ds = load_csv(path)
        return {sid: CLASSES[c] for sid, c in zip(ds.ids, derive_labels(ds))}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        names = reader.fieldnames or []
        col = column if column in names else next((c for c in names if c.endswith("tier")), None)
        if "student_id" not in names or col is None:
            raise SchemaError(f"{path}: expected columns student_id,{column}")
        out = {}
        for row_no, row in enumerate(reader, start=1):
            tier = row[col].strip()
            if tier not in CLASSES:
                raise SchemaError(f"{path}: row {row_no} has tier {tier!r}, expected A, B or C")
            out[row["student_id"]] = tier
    return out


def cmd_report(args) -> int:
    pred_path, act_path = Path(args.predicted), Path(args.actual)
    predicted = _read_tiers(pred_path, "predicted_tier")
    actual = _read_tiers(act_path, "actual_tier")
    missing = [sid for sid in predicted if sid not in actual]
    if missing or len(predicted) != len(actual):
        raise SchemaError(f"predicted and actual files cover different students ({len(missing)} without an actual tier)")
    ids = list(predicted)
    cc = compare_cohorts([predicted[i] for i in ids], [actual[i] for i in ids])
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = out / "comparison.txt"
    table.write_text(cc.table(), encoding="utf-8")
    cm_path = out / "confusion.csv"
    cc.matrix.to_csv(cm_path)
    flags = {"predicted": pred_path.name, "actual": act_path.name}
    _write_manifest(out / "manifest.json", "report", flags, [pred_path, act_path], {table.name: table, cm_path.name: cm_path})
    sys.stdout.write(cc.table())
    return EXIT_OK


def cmd_plan(args) -> int:
    if not args.all and not args.level:
        raise UsageError("give --level A|B|C or --all")
    plans = load_plans(args.plans)
    levels = list(Tier) if args.all else [Tier(args.level)]
    if not args.out_dir:
        sys.stdout.write("\n".join(generate_plan(t, plans).render() for t in levels))
        return EXIT_OK
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    arts = {}
    for t in levels:
        p = out / f"plan_{t.value}.txt"
        p.write_text(generate_plan(t, plans).render(), encoding="utf-8")
        arts[p.name] = p
    inputs = [Path(args.plans)] if args.plans else []
    _write_manifest(out / "manifest.json", "plan", {"level": args.level, "all": args.all}, inputs, arts)
    print(f"wrote {len(arts)} plan(s) to {out}")
    return EXIT_OK


def cmd_survey(args) -> int:
    src = Path(args.responses)
    if not src.exists():
        raise FileNotFoundError(f"no such file: {src}")
    questions = [q.strip() for q in args.questions.split(",")] if args.questions else None
    summary = aggregate_survey(read_survey_csv(src), questions)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_survey_csv(summary, out)
    _write_manifest(out.with_name(out.name + ".manifest.json"), "survey", {"responses": src.name, "questions": questions}, [src], {out.name: out})
    print(f"summarised {len(summary.questions)} question(s) into {out}")
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tierpredict", description="Student tier prediction pipeline.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a seeded synthetic cohort CSV")
    g.add_argument("--n", type=int, required=True, help="number of students")
    g.add_argument("--seed", type=int, required=True, help="master seed (64-bit unsigned)")
    g.add_argument("--out", required=True, help="output CSV path")
    g.add_argument("--config", help="generator config JSON (default: bundled calibrated config)")
    g.add_argument("--missing-rate", type=float, help="override the fraction of masked feature cells")
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", help="correlation heatmap and feature selection")
    a.add_argument("--data", required=True, help="cohort CSV with target scores")
    a.add_argument("--out-dir", required=True)
    a.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD, help="minimum |r| against the target (default 0.3)")
    a.add_argument("--override", help="comma-separated explicit feature list instead of thresholding")
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("train", help="grid search, CV and test evaluation for each model family")
    t.add_argument("--data", required=True)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--models", default="all", help=f"all or a comma list of {','.join(FAMILY_ORDER)}")
    t.add_argument("--out-dir", required=True)
    t.add_argument("--features", default="auto", help="auto (threshold selection), reference (fixed six-feature set), or a comma list")
    t.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    t.add_argument("--cv-folds", type=int, default=10, help="folds for cross-validation on the training split (0 disables)")
    t.set_defaults(func=cmd_train)

    pr = sub.add_parser("predict", help="predict tiers for a cohort CSV")
    pr.add_argument("--model", required=True, help="model JSON written by train")
    pr.add_argument("--data", required=True)
    pr.add_argument("--out", required=True)
    pr.set_defaults(func=cmd_predict)

    r = sub.add_parser("report", help="predicted-vs-actual tier comparison")
    r.add_argument("--predicted", required=True, help="CSV student_id,predicted_tier")
    r.add_argument("--actual", required=True, help="CSV student_id,actual_tier or a cohort CSV with target scores")
    r.add_argument("--out-dir", required=True)
    r.set_defaults(func=cmd_report)

    pl = sub.add_parser("plan", help="tiered-instruction plan documents")
    pl.add_argument("--level", choices=[t.value for t in Tier])
    pl.add_argument("--all", action="store_true")
    pl.add_argument("--plans", help="custom plan template JSON")
    pl.add_argument("--out-dir", help="write plan_<level>.txt files here instead of stdout")
    pl.set_defaults(func=cmd_plan)

    s = sub.add_parser("survey", help="tally Likert survey responses")
    s.add_argument("--responses", required=True, help="CSV respondent_id,question_id,likert")
    s.add_argument("--out", required=True)
    s.add_argument("--questions", help="comma list of question ids to report even when unanswered")
    s.set_defaults(func=cmd_survey)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"tierpredict: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"tierpredict: error: {msg}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"tierpredict: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
