"""Experiment harness: ``lackmv {gen,corrupt,run,eval}``.

Exit codes: 0 success, 2 configuration or validation error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .metrics import EvalReport, evaluate
from .mvdata import (
    MultiViewDataset,
    ValidationError,
    encode_labels,
    load_dataset,
    load_ground_truth,
    manifest_hash,
    read_label_tokens,
    save_dataset,
    stratified_label_sample,
    zscore_views,
)
from .solver import (
    METHOD_STRATEGY,
    SolveResult,
    SolverConfig,
    solve,
    solve_constrained_kmeans,
    solve_kmeans_single_view,
)
from .synth import BlobSpec, add_gaussian_noise_snr, append_view, gen_blobs, make_fake_view, replace_view

log = logging.getLogger("lackmv")

METHODS = ("MLCK", "DACK", "LACK", "CK", "KMEANS_PER_VIEW")
TRACE_SCHEMA = "lackmv-trace/1"
METRIC_KEYS = ("acc", "f_score", "precision", "recall", "macro_f_score", "macro_precision", "macro_recall")

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _sha(obj) -> str:
    return hashlib.sha256(_canonical(obj).encode()).hexdigest()


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _read_config(path) -> tuple[dict, Path]:
    if path is None:
        return {}, Path.cwd()
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    return doc, path.parent


def _resolve(base: Path, value) -> str | None:
    if value is None:
        return None
    p = Path(value)
    return str(p if p.is_absolute() else base / p)


def _blob_spec(doc: dict) -> BlobSpec:
    known = {f.name for f in fields(BlobSpec)}
    unknown = set(doc) - known
    if unknown:
        raise ValidationError(f"unknown blob spec keys {sorted(unknown)}")
    return BlobSpec(**doc)


# ----------------------------------------------------------------- corruptions


def apply_corruptions(ds: MultiViewDataset, corruptions: list[dict]) -> MultiViewDataset:
    """Apply fake-view and SNR-noise corruptions in order; view ids are 1-based."""
    for spec in corruptions:
        kind = spec.get("type")
        seed = int(spec.get("seed", 0))
        if kind == "fake_view":
            target = spec.get("target_norm")
            if isinstance(target, str) and target.startswith("view"):
                target = float(np.linalg.norm(ds.views[_view_index(ds, int(target[4:]))]))
            X = make_fake_view(ds.n, int(spec["rank"]), int(spec["dim"]), seed, target)
            if spec.get("mode", "append") == "append":
                ds = append_view(ds, X, spec.get("name", f"fake{ds.P + 1}"))
            else:
                ds = replace_view(ds, _view_index(ds, int(spec["view_id"])), X, spec.get("name"))
        elif kind == "noise":
            ids = spec.get("view_ids")
            if not ids:
                raise ValidationError("noise corruption needs a non-empty 'view_ids' list")
            snr = float(spec.get("snr", 1.0))
            idx = [_view_index(ds, int(v)) for v in ids]
            for j, p in enumerate(idx):
                noisy = add_gaussian_noise_snr(ds.views[p], snr, seed + j)
                if spec.get("mode", "replace") == "replace":
                    ds = replace_view(ds, p, noisy)
                else:
                    ds = append_view(ds, noisy, f"{ds.view_names[p]}+noise")
        else:
            raise ValidationError(f"unknown corruption type {kind!r}; expected 'fake_view' or 'noise'")
    return ds


def _view_index(ds: MultiViewDataset, view_id: int) -> int:
    if not 1 <= view_id <= ds.P:
        raise ValidationError(f"view id {view_id} does not exist; dataset has views 1..{ds.P}")
    return view_id - 1


# ------------------------------------------------------------------ commands


def cmd_gen(args) -> int:
    doc, base = _read_config(args.config)
    spec_doc = dict(doc.get("blobs", {}))
    if args.seed is not None:
        spec_doc["seed"] = args.seed[0]
    spec = _blob_spec(spec_doc)
    out = Path(args.out or _resolve(base, doc.get("out")) or "dataset")
    fmt = args.format or doc.get("format", "csv")
    ds, truth = gen_blobs(spec)
    manifest = save_dataset(
        ds,
        out,
        labels=truth.tolist(),
        fmt=fmt,
        extra={"provenance": {"generator": "blobs", "spec": asdict(spec), "lackmv": __version__}},
    )
    print(f"wrote {manifest} (P={ds.P}, n={ds.n})")
    return EXIT_OK


def cmd_corrupt(args) -> int:
    doc, base = _read_config(args.config)
    source = args.source or _resolve(base, doc.get("source"))
    if source is None:
        raise ValidationError("corrupt needs a source manifest (--source or 'source' in config)")
    out = Path(args.out or _resolve(base, doc.get("out")) or "corrupted")
    corruptions = doc.get("corruptions", [])
    source_doc = json.loads(Path(source).read_text())
    ds = apply_corruptions(load_dataset(source), corruptions)
    labels = None
    if "labels" in source_doc:
        truth, names = load_ground_truth(source)
        labels = [names[i] for i in truth]
    fmt = args.format or doc.get("format") or source_doc["views"][0].get("format", "csv")
    manifest = save_dataset(
        ds,
        out,
        labels=labels,
        fmt=fmt,
        extra={
            "provenance": {
                "source": str(source),
                "source_hash": manifest_hash(source),
                "corruptions": corruptions,
                "lackmv": __version__,
            }
        },
    )
    print(f"wrote {manifest} (P={ds.P}, n={ds.n})")
    return EXIT_OK


@dataclass
class ExperimentConfig:
    dataset: str | None = None
    blobs: dict | None = None
    tau: float = 0.1
    seeds: list[int] = field(default_factory=lambda: list(range(10)))
    methods: list[str] = field(default_factory=lambda: ["MLCK", "DACK", "LACK"])
    corruptions: list[dict] = field(default_factory=list)
    out: str = "results"
    max_iter: int = 50
    label_mode: str = "fixed"
    label_seed: int | None = None
    normalize: bool = False
    kmeans_n_init: int = 1

    def validate(self):
        if (self.dataset is None) == (self.blobs is None):
            raise ValidationError("give exactly one of 'dataset' (manifest path) or 'blobs' (inline spec)")
        if not 0 < self.tau <= 1:
            raise ValidationError(f"tau must lie in (0, 1], got {self.tau}")
        if not self.methods:
            raise ValidationError("at least one method is required")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValidationError(f"unknown methods {bad}; choose from {list(METHODS)}")
        if not self.seeds:
            raise ValidationError("at least one seed is required")
        if self.label_mode not in ("fixed", "resample"):
            raise ValidationError("label_mode must be 'fixed' or 'resample'")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1")
        if self.label_seed is None:
            self.label_seed = self.seeds[0]


def _experiment_config(args) -> ExperimentConfig:
    doc, base = _read_config(args.config)
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ValidationError(f"unknown config keys {sorted(unknown)}")
    if doc.get("dataset") is not None:
        doc["dataset"] = _resolve(base, doc["dataset"])
    if doc.get("out") is not None:
        doc["out"] = _resolve(base, doc["out"])
    cfg = ExperimentConfig(**doc)
    if args.dataset is not None:
        cfg.dataset, cfg.blobs = args.dataset, None
    if args.tau is not None:
        cfg.tau = args.tau
    if args.seed is not None:
        cfg.seeds = list(args.seed)
    if args.method is not None:
        cfg.methods = [m.upper() for m in args.method]
    if args.max_iter is not None:
        cfg.max_iter = args.max_iter
    if args.out is not None:
        cfg.out = args.out
    if args.label_mode is not None:
        cfg.label_mode = args.label_mode
    if args.normalize is not None:
        cfg.normalize = args.normalize
    cfg.validate()
    return cfg


def _load_experiment_data(cfg: ExperimentConfig):
    if cfg.dataset is not None:
        ds = load_dataset(cfg.dataset)
        truth, class_names = load_ground_truth(cfg.dataset)
        input_hash = manifest_hash(cfg.dataset)
    else:
        ds, truth = gen_blobs(_blob_spec(cfg.blobs))
        class_names = [str(k) for k in range(int(truth.max()) + 1)]
        input_hash = _sha({"blobs": cfg.blobs})
    if truth.shape[0] != ds.n:
        raise ValidationError(f"{truth.shape[0]} labels for {ds.n} samples")
    ds = apply_corruptions(ds, cfg.corruptions)
    if cfg.normalize:
        ds = zscore_views(ds)
    return ds, truth, class_names, input_hash


def write_trace_csv(path: Path, result: SolveResult, view_names) -> None:
    """One row per iteration, row 0 holding the initial weights."""
    header = ["iteration", *[f"d_{i + 1}" for i in range(len(view_names))], "objective", "changed", "wall_time"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        init = result.trace.initial_weights / result.trace.initial_weights.sum()
        w.writerow([0, *[repr(float(x)) for x in init], "", "", ""])
        for rec in result.trace.records:
            w.writerow(
                [
                    rec.iteration,
                    *[repr(float(x)) for x in rec.weights_normalized],
                    repr(rec.objective),
                    rec.changed,
                    f"{rec.wall_time:.6f}",
                ]
            )


def _run_one(method, seed, ds, truth, info, cfg) -> list[tuple[str, EvalReport, SolveResult | None]]:
    if method == "KMEANS_PER_VIEW":
        out = []
        for p in range(ds.P):
            pred = solve_kmeans_single_view(ds.views[p], int(truth.max()) + 1, seed, n_init=cfg.kmeans_n_init)
            out.append((f"KMEANS_V{p + 1}", evaluate(pred, truth, align=True), None))
        return out
    if method == "CK":
        res = solve_constrained_kmeans(ds, info, max_iter=cfg.max_iter)
    else:
        res = solve(ds, info, SolverConfig(strategy=METHOD_STRATEGY[method], max_iter=cfg.max_iter, seed=seed))
    u = res.unlabeled_ids
    if u.size == 0:
        raise ValidationError("no unlabeled samples left to evaluate; lower tau")
    return [(method, evaluate(res.assignments[u], truth[u]), res)]


def _fmt(x: float) -> str:
    return f"{100.0 * x:.2f}"


def cmd_run(args) -> int:
    cfg = _experiment_config(args)
    ds, truth, class_names, input_hash = _load_experiment_data(cfg)
    out = Path(cfg.out)
    resolved = asdict(cfg)
    stamp = {"config": resolved, "input_hash": input_hash, "lackmv": __version__, "trace_schema": TRACE_SCHEMA}
    _write_json(out / "config.resolved.json", stamp)

    fixed_info = stratified_label_sample(truth, cfg.tau, cfg.label_seed) if cfg.label_mode == "fixed" else None
    rows: dict[str, list[EvalReport]] = {}
    for method in cfg.methods:
        for seed in cfg.seeds:
            info = fixed_info or stratified_label_sample(truth, cfg.tau, seed)
            for name, report, res in _run_one(method, seed, ds, truth, info, cfg):
                rows.setdefault(name, []).append(report)
                run_dir = out / "runs" / name / f"seed_{seed}"
                run_dir.mkdir(parents=True, exist_ok=True)
                record = {
                    **stamp,
                    "method": name,
                    "seed": seed,
                    "label_seed": cfg.label_seed if cfg.label_mode == "fixed" else seed,
                    "n_labeled": int(info.l),
                    "eval": asdict(report),
                    "eval_percent": report.as_percent(),
                    "class_names": class_names,
                }
                if res is not None:
                    record["solve"] = {
                        "iterations_run": res.iterations_run,
                        "converged": res.converged,
                        "weights_final": res.weights_final.d.tolist(),
                        "weights_final_normalized": res.weights_final.normalized.tolist(),
                        "strategy": res.weights_final.strategy_tag.value,
                        "trace_note": res.trace.note,
                    }
                    names = ds.view_names if name != "CK" else ["concat"]
                    write_trace_csv(run_dir / "trace.csv", res, names)
                    (run_dir / "predictions.csv").write_text(
                        "".join(f"{class_names[k]}\n" for k in res.assignments)
                    )
                _write_json(run_dir / "result.json", record)

    agg_path = out / "aggregate.csv"
    with open(agg_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "runs", *[f"{k}_{s}" for k in METRIC_KEYS for s in ("mean", "std")], "input_hash"])
        for name, reports in rows.items():
            line = [name, len(reports)]
            for key in METRIC_KEYS:
                vals = np.array([getattr(r, key) for r in reports])
                std = vals.std(ddof=1) if vals.size > 1 else 0.0
                line += [_fmt(vals.mean()), _fmt(std)]
            w.writerow(line + [input_hash])

    print(f"{'method':<12} {'ACC':>15} {'F-score':>15} {'Precision':>15} {'Recall':>15}")
    for name, reports in rows.items():
        cells = []
        for key in ("acc", "f_score", "precision", "recall"):
            vals = np.array([getattr(r, key) for r in reports])
            std = vals.std(ddof=1) if vals.size > 1 else 0.0
            cells.append(f"{_fmt(vals.mean())} ± {_fmt(std)}")
        print(f"{name:<12} " + " ".join(f"{c:>15}" for c in cells))
    print(f"results in {out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    truth_tokens = read_label_tokens(args.truth)
    pred_tokens = read_label_tokens(args.pred)
    if len(pred_tokens) != len(truth_tokens):
        raise ValidationError(f"{len(pred_tokens)} predictions but {len(truth_tokens)} true labels")
    truth, names = encode_labels(truth_tokens)
    lookup = {t: i for i, t in enumerate(names)}
    pred = np.array([lookup.setdefault(t, len(lookup)) for t in pred_tokens], dtype=np.int64)
    report = evaluate(pred, truth, align=args.align)
    pct = report.as_percent()
    print(f"n_eval            {report.n_eval}")
    print(f"ACC               {pct['acc']:.2f}")
    print(f"F-score (pairs)   {pct['f_score']:.2f}")
    print(f"Precision (pairs) {pct['precision']:.2f}")
    print(f"Recall (pairs)    {pct['recall']:.2f}")
    print(f"F-score (macro)   {pct['macro_f_score']:.2f}")
    print(f"Precision (macro) {pct['macro_precision']:.2f}")
    print(f"Recall (macro)    {pct['macro_recall']:.2f}")
    if args.out:
        _write_json(Path(args.out), {"eval": asdict(report), "eval_percent": pct, "aligned": args.align})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lackmv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", "--seeds", dest="seed", type=int, nargs="+")

    p = sub.add_parser("gen", help="generate a synthetic blob dataset")
    common(p)
    p.add_argument("--format", choices=["csv", "f64bin"])
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("corrupt", help="add a fake view and/or SNR noise to a dataset")
    common(p)
    p.add_argument("--source", help="source manifest")
    p.add_argument("--format", choices=["csv", "f64bin"])
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("run", help="run methods over seeds and aggregate scores")
    common(p)
    p.add_argument("--dataset", help="dataset manifest (overrides config)")
    p.add_argument("--tau", type=float)
    p.add_argument("--method", "--methods", dest="method", nargs="+", type=str.upper, choices=METHODS)
    p.add_argument("--max-iter", type=int)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--fixed-labels", dest="label_mode", action="store_const", const="fixed")
    g.add_argument("--resample-labels", dest="label_mode", action="store_const", const="resample")
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=None, help="z-score every view")
    p.set_defaults(func=cmd_run, label_mode=None)

    p = sub.add_parser("eval", help="score a prediction file against a truth file")
    p.add_argument("pred")
    p.add_argument("truth")
    p.add_argument("--align", action="store_true", help="Hungarian-match clusters to classes first")
    p.add_argument("--out", help="write the report as JSON")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValidationError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
