"""Command-line entry point: train, clean, build, eval, query, stats.

Exit codes: 0 success, 1 usage, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import logging
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Sequence

from taxoclean import __version__
from taxoclean.classifier import (
    FeatureRow,
    Hyper,
    LogRegModel,
    Metrics,
    holdout_eval,
    kfold_cv,
    mean_average_precision,
    predict_proba,
    precision_recall_f1,
    recursive_feature_elimination,
    train,
)
from taxoclean.embeddings import EmbeddingFormatError, load_embeddings_file
from taxoclean.lexical import load_meta_terms
from taxoclean.network import (
    CategoryNetwork,
    Labels,
    NetworkFormatError,
    network_stats,
    parse_labels,
    parse_network,
    parse_relation_lookup,
    serialize_network,
)
from taxoclean.pipeline import (
    CategoryFeaturizer,
    EdgeContext,
    TopLevelReport,
    build_top_level,
    clean_categories,
    clean_edges,
    edge_features,
    load_blacklist,
    parse_corrections,
    taxonomy_from_network,
)
from taxoclean.taxonomy import (
    SearchIndex,
    TaxonomyError,
    deserialize,
    run_query,
    serialize,
)
from taxoclean.wordnet import WordNetError, candidate_synsets, load_wordnet

log = logging.getLogger("taxoclean")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

PATH_KEYS = (
    "network",
    "wordnet",
    "embeddings",
    "relations",
    "category_labels",
    "edge_labels",
    "blacklist",
    "corrections",
    "meta_terms",
    "category_model",
    "edge_model",
    "test_network",
    "test_labels",
)
DEFAULTS: dict[str, Any] = {
    **{k: None for k in PATH_KEYS},
    "network_format": "tsv",
    "out": ".",
    "l2": 1e-3,
    "learning_rate": 0.1,
    "epochs": 1000,
    "seed": 7,
    "folds": 10,
    "category_threshold": 0.5,
    "edge_threshold": 0.5,
    "hypervec": None,
}
TYPES = {
    "l2": float,
    "learning_rate": float,
    "epochs": int,
    "seed": int,
    "folds": int,
    "category_threshold": float,
    "edge_threshold": float,
}


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


DATA_ERRORS = (
    DataError,
    NetworkFormatError,
    WordNetError,
    EmbeddingFormatError,
    TaxonomyError,
    FileNotFoundError,
    UnicodeDecodeError,
    json.JSONDecodeError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# Configuration

def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def read_config(path: str | Path) -> dict[str, Any]:
    """Flat ``key = value`` file with ``#`` comments; values may be quoted."""
    parser = configparser.ConfigParser(
        interpolation=None, comment_prefixes=("#",), inline_comment_prefixes=("#",)
    )
    text = Path(path).read_text(encoding="utf-8")
    try:
        parser.read_string("[run]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise UsageError(f"config {path}: {exc}") from None
    out: dict[str, Any] = {}
    base = Path(path).resolve().parent
    for key, raw in parser["run"].items():
        if key not in DEFAULTS:
            raise UsageError(f"config {path}: unknown key {key!r}")
        value = raw.strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        if key in PATH_KEYS or key == "out":
            p = Path(value)
            value = str(p if p.is_absolute() else base / p)
        out[key] = value
    return out


def _coerce(key: str, value: Any) -> Any:
    if value is None:
        return None
    if key == "hypervec":
        return value if isinstance(value, bool) else _parse_bool(str(value))
    if key in TYPES:
        try:
            return TYPES[key](value)
        except ValueError:
            raise UsageError(f"{key}: expected {TYPES[key].__name__}, got {value!r}") from None
    return str(value)


@dataclass
class RunConfig:
    values: dict[str, Any]

    def __getattr__(self, key: str) -> Any:
        try:
            return self.values[key]
        except KeyError:
            raise AttributeError(key) from None

    @property
    def hyper(self) -> Hyper:
        return Hyper(self.l2, self.learning_rate, self.epochs, self.seed)

    @property
    def out_dir(self) -> Path:
        return Path(self.out)

    def require(self, *keys: str) -> None:
        missing = [k for k in keys if not self.values.get(k)]
        if missing:
            flags = ", ".join("--" + k.replace("_", "-") for k in missing)
            raise UsageError(f"missing required setting(s): {flags}")

    def canonical(self) -> str:
        return json.dumps(self.values, sort_keys=True, separators=(",", ":"))


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = dict(DEFAULTS)
    if getattr(args, "config", None):
        values.update(read_config(args.config))
    for key in DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    values = {k: _coerce(k, v) for k, v in values.items()}
    if values["network_format"] not in ("tsv", "jsonl"):
        raise UsageError("network_format must be tsv or jsonl")
    for key in ("category_threshold", "edge_threshold"):
        if not values[key] >= 0:
            raise UsageError(f"{key} must be >= 0")
    if values["folds"] < 2:
        raise UsageError("folds must be >= 2")
    return RunConfig(values)


def check_inputs(cfg: RunConfig, keys: Sequence[str]) -> None:
    """Fail fast: every configured input path among ``keys`` must exist."""
    missing = []
    for key in keys:
        path = cfg.values.get(key)
        if path and not Path(path).exists():
            missing.append(f"{key}: {path}")
    if cfg.hypervec and "embeddings" in keys and not cfg.embeddings:
        raise UsageError("hypervec is enabled but no embeddings file is configured")
    if missing:
        raise DataError("input file(s) not found:\n  " + "\n  ".join(missing))


# Input loading

def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def load_net(path: str, fmt: str) -> CategoryNetwork:
    with open(path, encoding="utf-8") as fh:
        try:
            return parse_network(fh, fmt)
        except NetworkFormatError as exc:
            raise DataError(f"{path}: {exc}") from None


def load_labels(path: str, net: CategoryNetwork) -> Labels:
    with open(path, encoding="utf-8") as fh:
        try:
            return parse_labels(fh, net)
        except NetworkFormatError as exc:
            raise DataError(f"{path}: {exc}") from None


def load_model(path: str) -> LogRegModel:
    try:
        return LogRegModel.from_json(_read(path))
    except (KeyError, ValueError, TypeError) as exc:
        raise DataError(f"{path}: not a model file ({exc})") from None


def _meta_terms(cfg: RunConfig):
    return load_meta_terms(cfg.meta_terms) if cfg.meta_terms else None


def edge_context(cfg: RunConfig, net: CategoryNetwork) -> EdgeContext:
    db = load_wordnet(cfg.wordnet) if cfg.wordnet else None
    emb = None
    if cfg.embeddings and cfg.hypervec is not False:
        emb = load_embeddings_file(cfg.embeddings)
    relations = {}
    if cfg.relations:
        with open(cfg.relations, encoding="utf-8") as fh:
            relations = parse_relation_lookup(fh)
    corrections = parse_corrections(_read(cfg.corrections)) if cfg.corrections else {}
    corrections = {c: s for c, s in corrections.items() if c in net.categories}
    return EdgeContext(net, db, emb, relations, corrections=corrections)


# Output helpers

def _json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _hash_path(path: str) -> str:
    h = hashlib.sha256()
    p = Path(path)
    files = sorted(q for q in p.rglob("*") if q.is_file()) if p.is_dir() else [p]
    for f in files:
        h.update(f.relative_to(p).as_posix().encode() if p.is_dir() else b"")
        h.update(f.read_bytes())
    return h.hexdigest()


def write_manifest(cfg: RunConfig, name: str, command: str, outputs: Sequence[str]) -> None:
    produced = {str(Path(o)) for o in outputs}
    inputs = {
        k: _hash_path(cfg.values[k])
        for k in PATH_KEYS
        if cfg.values.get(k) and Path(cfg.values[k]).exists() and str(Path(cfg.values[k])) not in produced
    }
    manifest = {
        "command": command,
        "version": __version__,
        "config": cfg.values,
        "config_sha256": hashlib.sha256(cfg.canonical().encode()).hexdigest(),
        "input_sha256": inputs,
        "seed": cfg.seed,
        "outputs": sorted(outputs),
    }
    _write(cfg.out_dir / name, _json(manifest))


def _fmt(x: float) -> str:
    return repr(float(x))


# Feature rows

def category_rows(net: CategoryNetwork, labels: Labels, meta_terms) -> list[FeatureRow]:
    if not labels.categories:
        raise DataError("no category labels found")
    feats = CategoryFeaturizer(net, meta_terms)
    return [feats.row(c, l) for c, l in sorted(labels.categories.items())]


def edge_rows(cfg: RunConfig, net: CategoryNetwork, labels: Labels) -> list[FeatureRow]:
    """Labelled edge rows over the network restricted to positively labelled categories.

    Category labels in the same file (or none at all) decide the restriction,
    mirroring that edge cleaning only sees edges surviving category cleaning.
    """
    if not labels.edges:
        raise DataError("no edge labels found")
    if labels.categories:
        net = net.restrict(c for c, l in labels.categories.items() if l)
    ctx = edge_context(cfg, net)
    rows = []
    for (c, p), label in sorted(labels.edges.items()):
        if (c, p) in net.subcat_edges:
            rows.append(edge_features(ctx, c, p, label))
    if not rows:
        raise DataError("no labelled edge survives the category restriction")
    return rows


def _stage_rows(cfg: RunConfig, stage: str, network: str, label_path: str) -> list[FeatureRow]:
    net = load_net(network, cfg.network_format)
    labels = load_labels(label_path, net)
    if stage == "categories":
        return category_rows(net, labels, _meta_terms(cfg))
    return edge_rows(cfg, net, labels)


def _edge_map(rows: Sequence[FeatureRow], probs: dict[str, float]) -> float:
    groups: dict[str, tuple[list[float], list[int]]] = {}
    for r in rows:
        parent = r.id.split("\t", 1)[1]
        scores, labels = groups.setdefault(parent, ([], []))
        scores.append(probs[r.id])
        labels.append(int(r.label))
    return mean_average_precision(groups[p] for p in sorted(groups))


def _metrics_row(m: Metrics) -> dict[str, float]:
    return {"Precision": m.precision, "Recall": m.recall, "F1-score": m.f1}


# Commands

def _label_key(stage: str) -> str:
    return "category_labels" if stage == "categories" else "edge_labels"


def _model_key(stage: str) -> str:
    return "category_model" if stage == "categories" else "edge_model"


def cmd_train(cfg: RunConfig, args: argparse.Namespace) -> int:
    stage = args.stage
    cfg.require("network", _label_key(stage))
    keys = ["network", _label_key(stage), "meta_terms", "test_network", "test_labels"]
    if stage == "edges":
        keys += ["wordnet", "embeddings", "relations", "corrections"]
    check_inputs(cfg, keys)
    if bool(cfg.test_network) != bool(cfg.test_labels):
        raise UsageError("cross-domain mode needs both --test-network and --test-labels")
    rows = _stage_rows(cfg, stage, cfg.network, cfg.values[_label_key(stage)])
    if len({r.label for r in rows}) < 2:
        raise DataError(f"{stage} labels contain a single class; training needs both")
    model = train(rows, cfg.hyper)
    report: dict[str, Any] = {
        "stage": stage,
        "rows": len(rows),
        "positives": sum(int(r.label) for r in rows),
        "hyper": asdict(cfg.hyper),
    }
    if cfg.test_network:
        test_rows = _stage_rows(cfg, stage, cfg.test_network, cfg.test_labels)
        threshold = cfg.category_threshold if stage == "categories" else cfg.edge_threshold
        metrics, probs = holdout_eval(rows, test_rows, cfg.hyper, threshold)
        report["mode"] = "cross-domain"
        report["holdout"] = metrics.as_dict()
        if stage == "edges":
            report["holdout"]["map"] = _edge_map(test_rows, probs)
    else:
        threshold = cfg.category_threshold if stage == "categories" else cfg.edge_threshold
        cv = kfold_cv(rows, min(cfg.folds, len(rows)), cfg.hyper, cfg.seed, threshold)
        report["mode"] = "cross-validation"
        report["cv"] = cv.as_dict()
        if stage == "edges":
            report["cv"]["aggregate"]["map"] = _edge_map(rows, cv.probabilities)
        for w in cv.warnings:
            log.warning(w)
    if args.ablation:
        traj = recursive_feature_elimination(rows, min(cfg.folds, len(rows)), cfg.hyper)
        report["ablation"] = [{"removed": n, "f1": f} for n, f in traj]
    model_path = Path(cfg.values[_model_key(stage)] or cfg.out_dir / f"{stage}_model.json")
    report_path = cfg.out_dir / f"{stage}_report.json"
    _write(model_path, model.to_json())
    _write(report_path, _json(report))
    write_manifest(cfg, f"train_{stage}_manifest.json", f"train --stage {stage}",
                   [str(model_path), str(report_path)])
    print(_json({"model": str(model_path), "report": str(report_path)}), end="")
    return EXIT_OK


def _category_scores_tsv(scores: dict[str, float], kept) -> str:
    lines = ["category\tscore\tkept\n"]
    for c in sorted(scores):
        lines.append(f"{c}\t{_fmt(scores[c])}\t{int(c in kept)}\n")
    return "".join(lines)


def _edge_scores_tsv(scores: dict[tuple[str, str], float], kept) -> str:
    lines = ["child\tparent\tscore\tkept\n"]
    for e in sorted(scores):
        lines.append(f"{e[0]}\t{e[1]}\t{_fmt(scores[e])}\t{int(e in kept)}\n")
    return "".join(lines)


def cmd_clean_categories(cfg: RunConfig, args: argparse.Namespace) -> int:
    cfg.require("network", "category_model")
    check_inputs(cfg, ["network", "category_model", "meta_terms"])
    net = load_net(cfg.network, cfg.network_format)
    model = load_model(cfg.category_model)
    kept, pruned, scores = clean_categories(net, model, cfg.category_threshold, _meta_terms(cfg))
    out = cfg.out_dir
    _write(out / "category_scores.tsv", _category_scores_tsv(scores, kept))
    _write(out / "pruned_network.tsv", serialize_network(pruned, "tsv"))
    write_manifest(cfg, "clean_categories_manifest.json", "clean-categories",
                   [str(out / "category_scores.tsv"), str(out / "pruned_network.tsv")])
    print(_json({"categories": len(net.categories), "kept": len(kept)}), end="")
    return EXIT_OK


def cmd_clean_edges(cfg: RunConfig, args: argparse.Namespace) -> int:
    cfg.require("network", "edge_model")
    check_inputs(cfg, ["network", "edge_model", "wordnet", "embeddings", "relations", "corrections"])
    net = load_net(cfg.network, cfg.network_format)
    model = load_model(cfg.edge_model)
    ctx = edge_context(cfg, net)
    kept, scores = clean_edges(ctx, model, cfg.edge_threshold)
    out = cfg.out_dir
    _write(out / "edge_scores.tsv", _edge_scores_tsv(scores, kept))
    _write(out / "cleaned_network.tsv", serialize_network(net.with_subcat_edges(kept), "tsv"))
    write_manifest(cfg, "clean_edges_manifest.json", "clean-edges",
                   [str(out / "edge_scores.tsv"), str(out / "cleaned_network.tsv")])
    print(_json({"edges": len(net.subcat_edges), "kept": len(kept)}), end="")
    return EXIT_OK


class StageError(Exception):
    def __init__(self, stage: str, exc: Exception):
        super().__init__(f"stage {stage}: {exc}")
        self.original = exc


def _stage(name: str, fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except DATA_ERRORS + (ValueError, KeyError) as exc:
        raise StageError(name, exc) from exc


def cmd_build(cfg: RunConfig, args: argparse.Namespace) -> int:
    cfg.require("network", "category_model", "edge_model")
    check_inputs(cfg, ["network", "category_model", "edge_model", "wordnet", "embeddings",
                       "relations", "blacklist", "corrections", "meta_terms"])
    net = load_net(cfg.network, cfg.network_format)
    cat_model = load_model(cfg.category_model)
    edge_model = load_model(cfg.edge_model)
    blacklist = load_blacklist(cfg.blacklist)

    kept_cats, pruned, cat_scores = _stage(
        "clean-categories", clean_categories, net, cat_model, cfg.category_threshold, _meta_terms(cfg)
    )
    ctx = _stage("clean-edges", edge_context, cfg, pruned)
    kept_edges, edge_scores = _stage("clean-edges", clean_edges, ctx, edge_model, cfg.edge_threshold)
    tax = _stage("build", taxonomy_from_network, pruned, kept_edges, edge_scores)
    before = tax.stats()
    report = TopLevelReport()
    if ctx.wordnet is not None:
        tax = _stage("build", build_top_level, tax, ctx.wordnet, ctx.synset_links, blacklist,
                     ctx.corrections, report)
    else:
        log.warning("no wordnet configured; top-level construction skipped")
        tax.validate()
    after = tax.stats()

    stats = {
        "input": network_stats(net).as_dict(),
        "categories_kept": len(kept_cats),
        "edges_kept": len(kept_edges),
        "taxonomy": {"types": after["classes"], "edges": after["subclass_edges"] + after["instance_edges"], **after},
        "wordnet_integration": {
            "linked_classes": len(report.linked),
            "new_types": after["wordnet_classes"],
            "new_edges": after["subclass_edges"] - before["subclass_edges"],
            "skipped_chains": list(report.skipped),
        },
    }
    out = cfg.out_dir
    files = {
        "taxonomy.csv": serialize(tax, "csv"),
        "taxonomy.json": serialize(tax, "json"),
        "stats.json": _json(stats),
        "category_scores.tsv": _category_scores_tsv(cat_scores, kept_cats),
        "edge_scores.tsv": _edge_scores_tsv(edge_scores, kept_edges),
    }
    for name, text in files.items():
        _write(out / name, text)
    write_manifest(cfg, "manifest.json", "build", [str(out / n) for n in files])
    print(_json(stats["taxonomy"]), end="")
    return EXIT_OK


def _edge_kind(db, c1: str, c2: str) -> str:
    if db is None:
        return "proper-name"
    known = all(candidate_synsets(db, c)[0] != "none" for c in (c1, c2))
    return "concept" if known else "proper-name"


def cmd_eval(cfg: RunConfig, args: argparse.Namespace) -> int:
    """Evaluation table.

    Without a model: in-domain k-fold CV row (Method, Universe, P, R, F1).
    With a model: cross-domain row (Train, Test, P, R, F1).  Edge tables
    add MAP, plus a proper-name vs concept edge split.
    """
    stage = args.stage
    cfg.require("network", _label_key(stage))
    keys = ["network", _label_key(stage), _model_key(stage), "meta_terms"]
    if stage == "edges":
        keys += ["wordnet", "embeddings", "relations", "corrections"]
    check_inputs(cfg, keys)
    rows = _stage_rows(cfg, stage, cfg.network, cfg.values[_label_key(stage)])
    threshold = cfg.category_threshold if stage == "categories" else cfg.edge_threshold
    universe = args.universe or Path(cfg.network).stem
    model_path = cfg.values[_model_key(stage)] if args.use_model else None
    if model_path:
        model = load_model(model_path)
        probs_arr = predict_proba(model, [r.values for r in rows])
        probs = {r.id: float(p) for r, p in zip(rows, probs_arr)}
        columns = ["Train", "Test", "Precision", "Recall", "F1-score"]
        lead = {"Train": args.train_universe or Path(model_path).stem, "Test": universe}
    else:
        cv = kfold_cv(rows, min(cfg.folds, len(rows)), cfg.hyper, cfg.seed, threshold)
        probs = cv.probabilities
        columns = ["Method", "Universe", "Precision", "Recall", "F1-score"]
        lead = {"Method": "taxoclean", "Universe": universe}

    def metrics_for(subset):
        pred = [int(probs[r.id] >= threshold) for r in subset]
        gold = [int(r.label) for r in subset]
        p, r, f1 = precision_recall_f1(pred, gold)
        return Metrics(p, r, f1, len(subset))

    row = {**lead, **_metrics_row(metrics_for(rows))}
    table: dict[str, Any] = {"stage": stage, "threshold": threshold}
    if stage == "edges":
        columns.append("MAP")
        row["MAP"] = _edge_map(rows, probs)
        db = load_wordnet(cfg.wordnet) if cfg.wordnet else None
        split = {"proper-name": [], "concept": []}
        for r in rows:
            c1, c2 = r.id.split("\t", 1)
            split[_edge_kind(db, c1, c2)].append(r)
        table["edge_types"] = {
            "columns": ["Universe", "PE-Precision", "PE-Recall", "PE-F1", "CE-Precision", "CE-Recall", "CE-F1"],
            "rows": [[universe]
                     + [v for k in ("proper-name", "concept")
                        for v in (lambda m: [m.precision, m.recall, m.f1])(metrics_for(split[k]))]],
            "counts": {k: len(v) for k, v in split.items()},
        }
    table["columns"] = columns
    table["rows"] = [[row[c] for c in columns]]
    text = _json(table)
    name = f"eval_{stage}.json"
    _write(cfg.out_dir / name, text)
    print(text, end="")
    return EXIT_OK


def cmd_query(cfg: RunConfig, args: argparse.Namespace) -> int:
    path = args.taxonomy
    if not Path(path).exists():
        raise DataError(f"taxonomy file not found: {path}")
    fmt = "json" if path.endswith(".json") else "csv"
    tax = deserialize(_read(path), fmt)
    index = SearchIndex(tax)
    try:
        result = run_query(index, args.kind, args.terms)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(json.dumps(result, ensure_ascii=False, sort_keys=True))
    return EXIT_OK


def cmd_stats(cfg: RunConfig, args: argparse.Namespace) -> int:
    if args.taxonomy:
        path = args.taxonomy
        if not Path(path).exists():
            raise DataError(f"taxonomy file not found: {path}")
        tax = deserialize(_read(path), "json" if path.endswith(".json") else "csv")
        print(_json(tax.stats()), end="")
        return EXIT_OK
    cfg.require("network")
    check_inputs(cfg, ["network"])
    print(_json(network_stats(load_net(cfg.network, cfg.network_format)).as_dict()), end="")
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "clean-categories": cmd_clean_categories,
    "clean-edges": cmd_clean_edges,
    "build": cmd_build,
    "eval": cmd_eval,
    "query": cmd_query,
    "stats": cmd_stats,
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value settings file")
    for key in PATH_KEYS:
        p.add_argument("--" + key.replace("_", "-"), dest=key, metavar="PATH")
    p.add_argument("--network-format", dest="network_format", choices=("tsv", "jsonl"))
    p.add_argument("--out", dest="out", metavar="DIR", help="output directory")
    for key in TYPES:
        p.add_argument("--" + key.replace("_", "-"), dest=key, metavar=key.upper())
    p.add_argument("--hypervec", dest="hypervec", choices=("true", "false"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="taxoclean", description="Taxonomy induction from category networks.")
    parser.add_argument("--version", action="version", version=f"taxoclean {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a stage model with a CV or cross-domain report")
    p.add_argument("--stage", required=True, choices=("categories", "edges"))
    p.add_argument("--ablation", action="store_true", help="append a feature-elimination trajectory")
    _add_config_flags(p)

    for name, hint in (("clean-categories", "score and prune categories"),
                       ("clean-edges", "score and prune subcategory edges"),
                       ("build", "full three-stage run producing the taxonomy")):
        _add_config_flags(sub.add_parser(name, help=hint))

    p = sub.add_parser("eval", help="P/R/F1 (and MAP) evaluation table")
    p.add_argument("--stage", required=True, choices=("categories", "edges"))
    p.add_argument("--use-model", action="store_true",
                   help="evaluate the configured model instead of running k-fold CV")
    p.add_argument("--universe", help="label for the evaluated data set")
    p.add_argument("--train-universe", help="label for the training data set")
    _add_config_flags(p)

    p = sub.add_parser("query", help="entity search over a taxonomy file")
    p.add_argument("--taxonomy", required=True, help="taxonomy .csv or .json")
    p.add_argument("kind", choices=("single", "and", "diff"))
    p.add_argument("terms", nargs="+")

    p = sub.add_parser("stats", help="summary counts of a network or taxonomy")
    p.add_argument("--taxonomy", help="report a taxonomy file instead of a network")
    _add_config_flags(p)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version and argparse usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        cfg = resolve_config(args) if args.command != "query" else RunConfig(dict(DEFAULTS))
        return COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        print(f"taxoclean: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"taxoclean: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DATA_ERRORS as exc:
        print(f"taxoclean: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"taxoclean: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
