"""Command-line interface.

Exit codes: 0 success, 1 I/O failure, 2 usage, schema or data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .boosting import BoostParams, Trainer, TrainedModel
from .boosting.params import LOGLOSS
from .dataset import CATEGORICAL, NUMERICAL, TARGET, DataError, FeatureSchema, dummy_name, load_csv
from .experiments import KINDS, run_experiment, write_report
from .metrics import eval_metrics

CONFIG_KEYS = {"params", "schema", "missing_policy", "experiment"}

EXIT_IO = 1
EXIT_USAGE = 2


class UsageError(ValueError):
    pass


def load_config(path) -> dict:
    """Run configuration: ``params`` (BoostParams fields), ``schema`` (column
    kinds), ``missing_policy`` ("impute" or "error") and ``experiment`` (grid
    settings). Unknown keys are rejected."""
    with open(path) as fh:
        try:
            config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(config, dict):
        raise UsageError(f"{path}: config must be a JSON object")
    unknown = set(config) - CONFIG_KEYS
    if unknown:
        raise UsageError(f"{path}: unknown config keys: {sorted(unknown)}")
    return config


def _header(path) -> list[str]:
    with open(path, newline="") as fh:
        try:
            return [h.strip() for h in next(csv.reader(fh))]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None


def _float(v: float) -> str:
    return repr(float(v))


def cmd_train(args) -> int:
    config = load_config(args.config)
    if "schema" not in config:
        raise UsageError("config needs a 'schema' section for training")
    params = BoostParams.from_dict(config.get("params", {}))
    schema = FeatureSchema.from_spec(config["schema"], _header(args.data))
    data = load_csv(args.data, schema, config.get("missing_policy", "impute"))
    trainer = Trainer(data, params)
    model = trainer.run()
    model.save(args.out)
    log_path = args.log or f"{args.out}.log.csv"
    with open(log_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "train_loss", "depth", "permutation", "n_maintained"])
        for rec in trainer.trace:
            w.writerow([rec.iteration, _float(rec.train_loss), rec.tree.depth, rec.r, rec.n_maintained])
    return 0


def _schema_for(model: TrainedModel) -> FeatureSchema:
    layout = model.layout
    dummies = {dummy_name(d) for d in layout.dummies}
    cols = [(n, NUMERICAL) for n in layout.num_names if n not in dummies]
    cols += [(n, CATEGORICAL) for n in layout.cat_names]
    cols.append((layout.target_name or "target", TARGET))
    return FeatureSchema(tuple(cols))


def cmd_predict(args) -> int:
    model = TrainedModel.load(args.model)
    data = load_csv(args.data, _schema_for(model), "impute", layout=model.layout, require_target=False)
    scores = model.predict(data)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if model.params.loss == LOGLOSS:
            w.writerow(["score", "probability"])
            for s, p in zip(scores, model.predict_proba(data)):
                w.writerow([_float(s), _float(p)])
        else:
            w.writerow(["score"])
            for s in scores:
                w.writerow([_float(s)])
    return 0


def _column(path, name) -> list[float]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if name not in header:
            raise DataError(f"{path}: no column {name!r}")
        c = header.index(name)
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                out.append(float(row[c]))
            except (ValueError, IndexError):
                raise DataError(f"{path}: line {lineno}: bad value in {name!r}") from None
    return out


def cmd_eval(args) -> int:
    scores = _column(args.pred, "score")
    labels = _column(args.data, args.target)
    if len(scores) != len(labels):
        raise DataError(f"{len(scores)} predictions for {len(labels)} labelled rows")
    report = eval_metrics(scores, labels)
    print(json.dumps(report.to_dict(), sort_keys=True))
    return 0


def cmd_experiment(args) -> int:
    config = load_config(args.config) if args.config else {}
    result = run_experiment(args.kind, config)
    csv_path, json_path = write_report(result, args.out)
    print(f"wrote {csv_path} and {json_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ordboost", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and write it with a per-iteration log")
    p.add_argument("--config", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--log", help="training log CSV (default: <out>.log.csv)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score a CSV file with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="logloss and zero-one loss of a prediction file")
    p.add_argument("--pred", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--target", default="target", help="label column in --data (default: target)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", help="run an ablation grid")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--config")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, DataError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
