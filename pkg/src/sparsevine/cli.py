"""Command-line surface: fit, predict, simulate, extract-features, evaluate.

Exit codes: 0 success, 2 data or numerical failure, 64 usage error.  Failures
emit one machine-readable JSON line on stderr.  The SPARSEVINE_LOG
environment variable sets the log level (DEBUG, INFO, WARNING, ...).

Model files are versioned JSON ("schema": 1) with the D-vine payload under
the fixed field names order / truncation / pair_copulas / margins, plus a
"columns" list mapping variable ids back to CSV column names.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import dvine, genomics, select, simbench

__all__ = ["main"]

EXIT_OK = 0
EXIT_FAILURE = 2
EXIT_USAGE = 64

logger = logging.getLogger("sparsevine.cli")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 64 instead of argparse's default 2
        raise UsageError(message)


# ---------------------------------------------------------------------------
# tabular I/O
# ---------------------------------------------------------------------------

def _read_csv(path: str) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, header row required") from None
        rows = []
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                raise ValueError(f"{path}: non-numeric cell on line {i}") from None
    data = np.asarray(rows, dtype=float) if rows else np.empty((0, len(header)))
    if rows and data.shape[1] != len(header):
        raise ValueError(f"{path}: ragged rows")
    return [h.strip() for h in header], data


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _sidecar(path: str, suffix: str) -> str:
    root, ext = os.path.splitext(path)
    return f"{root}.{suffix}"


def _parse_levels(text: str) -> list[float]:
    levels = [float(tok) for tok in text.split(",") if tok.strip()]
    if not levels or any(not 0.0 < a < 1.0 for a in levels):
        raise UsageError("levels must lie strictly inside (0, 1)")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise UsageError("levels must be strictly increasing")
    return levels


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_fit(args) -> int:
    header, data = _read_csv(args.input)
    if args.response not in header:
        raise ValueError(f"response column {args.response!r} not found")
    resp_idx = header.index(args.response)
    expl = [j for j in range(len(header)) if j != resp_idx]
    if not expl:
        raise ValueError("no explanatory columns in the input")
    matrix = np.column_stack([data[:, resp_idx]] + [data[:, j] for j in expl])
    columns = [args.response] + [header[j] for j in expl]
    config = select.SelectionConfig(
        method=args.method,
        criterion=args.criterion,
        pseudo_quantile=args.pseudo_quantile,
        parallel_candidates=args.threads > 1,
        threads=args.threads,
    )
    runner = {
        "res": select.vinereg_res,
        "parcor": select.vinereg_parcor,
        "baseline": select.vinereg_baseline,
    }[args.method]
    model, trace = runner(matrix, config)
    payload = {"schema": 1, "columns": columns}
    payload.update(dvine.model_to_dict(model))
    with open(args.output, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    with open(_sidecar(args.output, "trace.json"), "w", encoding="utf-8") as fh:
        json.dump(trace.to_dict(), fh, indent=2, sort_keys=True)
    logger.info(
        "fit complete: chosen=%s stop=%s fits=%d", trace.chosen, trace.stop_reason, trace.total_fits
    )
    return EXIT_OK


def _load_model(path: str):
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("schema") != 1:
        raise ValueError(f"unsupported model schema {payload.get('schema')!r}")
    return dvine.model_from_dict(payload), payload.get("columns")


def cmd_predict(args) -> int:
    model, columns = _load_model(args.model)
    levels = _parse_levels(args.levels)
    header, data = _read_csv(args.input)
    width = max(model.order) if model.n_explanatory else 1
    X = np.zeros((data.shape[0], width))
    for var in model.order[1:]:
        name = columns[var] if columns else None
        if name is None or name not in header:
            raise ValueError(f"input lacks model column {name or var!r}")
        X[:, var - 1] = data[:, header.index(name)]
    out_header = [f"q{a:g}" for a in levels]
    if data.shape[0] == 0:
        _write_csv(args.output, out_header, [])
        return EXIT_OK
    preds = dvine.predict_quantiles(model, X, levels)
    _write_csv(args.output, out_header, preds.tolist())
    return EXIT_OK


def cmd_simulate(args) -> int:
    cases = simbench.DGP1_CASES if args.dgp == 1 else simbench.DGP2_CASES
    if args.case not in cases:
        raise ValueError(f"DGP{args.dgp} has no case {args.case}")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in ("res", "parcor", "baseline"):
            raise UsageError(f"unknown method {m!r}")
    cfg = simbench.DGPConfig(dgp=args.dgp, p=cases[args.case], sigma=args.sigma, seed=args.seed)
    overrides = {"parallel_candidates": args.threads > 1, "threads": args.threads}
    result = simbench.run_benchmark(cfg, methods=methods, replications=args.reps,
                                    config_overrides=overrides)
    rows = [
        [r["method"], r["dgp"], r["case"], r["measure"], f"{r['mean']:.6g}", f"{r['se']:.6g}"]
        for r in result.rows
    ]
    _write_csv(args.output, ["method", "dgp", "case", "measure", "mean", "se"], rows)
    with open(_sidecar(args.output, "json"), "w", encoding="utf-8") as fh:
        fh.write(result.to_json())
    for r in result.rows:
        print(
            f"dgp{r['dgp']} case{r['case']} {r['method']:>8s} {r['measure']:>13s} "
            f"{r['mean']:9.4f} ({r['se']:.4f})"
        )
    if result.failures:
        print(f"failures: {result.failures}", file=sys.stderr)
    return EXIT_OK


def _read_snps(path: str) -> genomics.SNPMatrix:
    if path.endswith(".svm1") or path.endswith(".bin"):
        return genomics.read_snp_binary(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            vals = []
            for j, cell in enumerate(row):
                try:
                    x = int(float(cell))
                except ValueError:
                    x = -1
                if x not in (0, 2):
                    raise genomics.SNPValueError(
                        f"{path}: SNP value {cell!r} at line {i}, column {header[j]!r}; "
                        "entries must be 0 or 2"
                    )
                vals.append(x)
            rows.append(vals)
    return genomics.SNPMatrix(values=np.asarray(rows, dtype=np.uint8),
                              col_ids=tuple(h.strip() for h in header))


def cmd_extract_features(args) -> int:
    snps = _read_snps(args.input)
    trait_header, traits = _read_csv(args.trait_file)
    if args.response not in trait_header:
        raise ValueError(f"trait column {args.response!r} not found")
    y = traits[:, trait_header.index(args.response)]
    if y.shape[0] != snps.shape[0]:
        raise ValueError("trait rows do not match SNP rows")
    test = _read_snps(args.test_input) if args.test_input else None
    train_f, test_f = genomics.preprocess(snps, test, freq_threshold=args.freq_threshold)
    result = genomics.screen(y, train_f, p_cut=args.p_cut)
    if not result.order:
        raise ValueError("no SNPs pass the screening p-value cut")
    features = genomics.extract_features(result, train_f, args.grouping)
    names = [f"feature{d + 1}" for d in range(features.values.shape[1])]
    _write_csv(args.output, names, features.values.tolist())
    with open(_sidecar(args.output, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(genomics.feature_manifest(features), fh, indent=2, sort_keys=True)
    if test_f is not None and args.test_output:
        test_features = genomics.extract_features(result, test_f, args.grouping)
        _write_csv(args.test_output, names, test_features.values.tolist())
    logger.info("screened %d SNPs into %d features", len(result.order), len(names))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    pred_header, preds = _read_csv(args.input)
    truth_header, truth = _read_csv(args.truth)
    if args.response:
        if args.response not in truth_header:
            raise ValueError(f"truth column {args.response!r} not found")
        y = truth[:, truth_header.index(args.response)]
    elif len(truth_header) == 1:
        y = truth[:, 0]
    else:
        raise ValueError("truth file has several columns; use --response")
    if preds.shape[0] != y.shape[0]:
        raise ValueError("prediction and truth row counts differ")
    rows = []
    for j, name in enumerate(pred_header):
        if not name.startswith("q"):
            continue
        alpha = float(name[1:])
        rows.append([f"pinball_{alpha:g}", f"{simbench.pinball(y, preds[:, j], alpha):.6g}"])
    if args.labels:
        with open(args.labels, encoding="utf-8") as fh:
            labels = json.load(fh)
        chosen = set(labels["chosen"])
        relevant = set(labels.get("relevant", ()))
        irrelevant = set(labels.get("irrelevant", ()))
        tpr = len(chosen & relevant) / len(relevant) if relevant else 0.0
        fdr = len(chosen & irrelevant) / len(chosen) if chosen else 0.0
        rows.append(["tpr", f"{tpr:.6g}"])
        rows.append(["fdr", f"{fdr:.6g}"])
    _write_csv(args.output, ["measure", "value"], rows)
    for measure, value in rows:
        print(f"{measure} {value}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="sparsevine", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a sparse D-vine regression to a CSV")
    fit.add_argument("--input", required=True)
    fit.add_argument("--output", required=True)
    fit.add_argument("--response", required=True)
    fit.add_argument("--method", choices=("res", "parcor", "baseline"), default="res")
    fit.add_argument("--criterion", choices=("aic", "bic"), default="aic")
    fit.add_argument("--pseudo-quantile", type=float, default=0.50)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--threads", type=int, default=1)
    fit.set_defaults(func=cmd_fit)

    pred = sub.add_parser("predict", help="quantile predictions from a model JSON")
    pred.add_argument("--model", required=True)
    pred.add_argument("--input", required=True)
    pred.add_argument("--output", required=True)
    pred.add_argument("--levels", default="0.05,0.50,0.95")
    pred.add_argument("--seed", type=int, default=0)
    pred.add_argument("--threads", type=int, default=1)
    pred.set_defaults(func=cmd_predict)

    sim = sub.add_parser("simulate", help="run the DGP benchmark")
    sim.add_argument("--dgp", type=int, choices=(1, 2), required=True)
    sim.add_argument("--case", type=int, required=True)
    sim.add_argument("--reps", type=int, default=10)
    sim.add_argument("--methods", default="res,parcor")
    sim.add_argument("--sigma", type=float, default=1.0)
    sim.add_argument("--output", default="benchmark.csv")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--threads", type=int, default=1)
    sim.set_defaults(func=cmd_simulate)

    ext = sub.add_parser("extract-features", help="SNP screening and grouped features")
    ext.add_argument("--input", required=True, help="SNP matrix (CSV or .svm1 binary)")
    ext.add_argument("--trait-file", required=True)
    ext.add_argument("--response", required=True)
    ext.add_argument("--output", required=True)
    ext.add_argument("--test-input")
    ext.add_argument("--test-output")
    ext.add_argument("--grouping", type=int, default=100)
    ext.add_argument("--freq-threshold", type=float, default=0.05)
    ext.add_argument("--p-cut", type=float, default=0.10)
    ext.add_argument("--seed", type=int, default=0)
    ext.add_argument("--threads", type=int, default=1)
    ext.set_defaults(func=cmd_extract_features)

    ev = sub.add_parser("evaluate", help="pinball loss (and TPR/FDR) of predictions")
    ev.add_argument("--input", required=True, help="predictions CSV (q<level> columns)")
    ev.add_argument("--truth", required=True)
    ev.add_argument("--response")
    ev.add_argument("--labels")
    ev.add_argument("--output", required=True)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--threads", type=int, default=1)
    ev.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("SPARSEVINE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(name)s %(levelname)s %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(json.dumps({"error": "usage", "detail": str(exc)}), file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)}), file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
