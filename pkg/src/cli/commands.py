"""
Sub-command Implementations
===========================

每个 cmd_* 接收解析后的参数与原始子命令参数列表，完成工作后写出 RunManifest。
所有随机性都来自 --seed (或配置中的 seed) 派生的子流；index / eval / classify 在缺少 split.json 时
使用检查点中记录的训练种子重建划分。
"""

from __future__ import annotations

import argparse
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd
from loguru import logger

from cli.manifest import RunManifest, Stopwatch, manifest_path
from config import constants
from core.errors import ConfigError, ContractError, DataError, DomainError, FormatError
from corpus.data_model import Corpus, Query
from corpus.generator import GeneratorConfig, generate_synthetic_corpus
from corpus.queries import enumerate_queries, graded_relevance
from corpus.split import stratified_split
from evalsuite.classification import dummy_classifier, macro_prf, zero_shot_classify
from evalsuite.evaluate import MetricsReport, Scope, evaluate_retrieval, metric_key
from evalsuite.geo import spatial_probe
from evalsuite.reporting import write_csv, write_json, write_text
from retrieval.index import EmbeddingIndex, index_corpus, search
from storage.checkpoint import load_checkpoint, save_checkpoint
from storage.corpus_io import read_corpus, read_split, write_corpus, write_split
from storage.index import load_index, save_index
from trainer.checkpoint import ModelCheckpoint, checkpoint_compatible
from trainer.config import TrainConfig
from trainer.loop import TrainResult, train


# ============================================================================
# 辅助函数
# ============================================================================

def _finish(command: str, argv: Sequence[str], watch: Stopwatch, output: Path, *,
            config: Optional[Dict[str, Any]] = None, seed: Optional[int] = None,
            inputs: Optional[Dict[str, Any]] = None, outputs: Optional[Dict[str, Any]] = None) -> int:
    manifest = RunManifest(
        command=command,
        argv=list(argv),
        config=config or {},
        seed=seed,
        inputs={k: str(v) for k, v in (inputs or {}).items()},
        outputs={k: str(v) for k, v in (outputs or {}).items()},
        duration_s=watch.elapsed(),
    )
    manifest.save(manifest_path(output, command))
    return constants.EXIT_OK


def split_corpus(corpus: Corpus, corpus_dir: Path, seed: Optional[int]) -> Tuple[Corpus, Corpus]:
    """
    按 split.json 划分 (训练集, 检索集)

    没有 split.json 时以 seed 现场划分；seed 应与训练时的种子一致，为 None 时报错。

    Raises:
        FormatError: 缺少 split.json 且无法确定划分种子
    """
    try:
        split = read_split(corpus_dir)
    except DataError:
        if seed is None:
            raise FormatError(f"split file missing in {corpus_dir} and the split seed is ambiguous",
                              expected=constants.CORPUS_SPLIT_FILE, found="nothing")
        logger.warning(f"No split file in {corpus_dir}, splitting with seed {seed}")
        split = stratified_split(corpus, constants.DEFAULT_TRAIN_FRACTION, seed)
    return corpus.subset(split.train_ids), corpus.subset(split.retrieval_ids)


def load_split_corpus(corpus_dir: Path, seed: Optional[int]) -> Tuple[Corpus, Corpus, Corpus]:
    """
    读取语料及其划分

    Returns:
        (完整语料, 训练集, 检索集)
    """
    corpus = read_corpus(corpus_dir)
    return (corpus, *split_corpus(corpus, corpus_dir, seed))


def split_seed(*checkpoints: ModelCheckpoint) -> Optional[int]:
    """训练这些检查点时使用的种子；各检查点种子不同时返回 None"""
    seeds = {checkpoint.train_config.seed for checkpoint in checkpoints}
    return seeds.pop() if len(seeds) == 1 else None


def scoped_items(corpus: Corpus, scope: Scope) -> Corpus:
    if scope.modality is None:
        return corpus
    return corpus.subset(item.id for item in corpus.of_modality(scope.modality))


def _scope(value: Optional[str]) -> Scope:
    scope = Scope.from_string(value or "all")
    if scope is None:
        raise ConfigError(f"Unknown scope {value!r}")
    return scope


def _checkpoint_for(path: Path, corpus: Corpus) -> ModelCheckpoint:
    checkpoint = load_checkpoint(path)
    checkpoint_compatible(checkpoint, corpus.image_side)
    return checkpoint


def _index_for(checkpoint: ModelCheckpoint, path: Optional[Path], items: Sequence = ()) -> EmbeddingIndex:
    """有 --index 时读取并校验已保存的索引，否则现场为 items 建立索引"""
    if path is None:
        return index_corpus(checkpoint, list(items))
    index = load_index(path)
    checkpoint_compatible(checkpoint, int(index.provenance.get("image_side", 0)),
                          embed_dim=index.embed_dim,
                          vocabulary=index.provenance.get("vocabulary"))
    return index


def _train_config(args: argparse.Namespace) -> TrainConfig:
    overrides = {"seed": args.seed, "alpha": getattr(args, "alpha", None)}
    if getattr(args, "use_location", False):
        overrides["use_location"] = True
    if getattr(args, "modalities", None):
        overrides["modalities"] = args.modalities
    if args.config:
        return TrainConfig.from_file(args.config, **overrides)
    try:
        return TrainConfig(**{k: v for k, v in overrides.items() if v is not None})
    except (ContractError, DomainError) as exc:
        raise ConfigError(str(exc)) from exc


def write_loss_trace(path: Path, result: TrainResult) -> Path:
    frame = pd.DataFrame([record.to_dict() for record in result.trace], columns=["epoch", "mean_loss", "lr", "tau"])
    return write_csv(path, frame)


# ============================================================================
# gen-corpus
# ============================================================================

def cmd_gen_corpus(args: argparse.Namespace, argv: Sequence[str]) -> int:
    watch = Stopwatch()
    config = GeneratorConfig.from_file(args.config) if args.config else GeneratorConfig()
    seed = config.seed if args.seed is None else args.seed
    out_dir = Path(args.out)

    corpus = generate_synthetic_corpus(config, seed)
    split = stratified_split(corpus, config.train_fraction, seed)
    write_corpus(corpus, out_dir)
    split_path = write_split(split, out_dir)
    return _finish("gen-corpus", argv, watch, out_dir, config=config.to_dict(), seed=seed,
                   inputs={"config": args.config or "<defaults>"},
                   outputs={"corpus": out_dir, "split": split_path})


# ============================================================================
# train
# ============================================================================

def cmd_train(args: argparse.Namespace, argv: Sequence[str]) -> int:
    watch = Stopwatch()
    config = _train_config(args)
    _, train_items, _ = load_split_corpus(Path(args.corpus), config.seed)
    out = Path(args.out)

    result = train(config, list(train_items))
    save_checkpoint(out, result.checkpoint)
    trace_path = write_loss_trace(out.with_name(out.stem + ".loss.csv"), result)
    return _finish("train", argv, watch, out, config=config.to_dict(), seed=config.seed,
                   inputs={"corpus": args.corpus, "config": args.config or "<defaults>"},
                   outputs={"checkpoint": out, "loss_trace": trace_path})


# ============================================================================
# index / query
# ============================================================================

def cmd_index(args: argparse.Namespace, argv: Sequence[str]) -> int:
    watch = Stopwatch()
    corpus = read_corpus(Path(args.corpus))
    checkpoint = _checkpoint_for(Path(args.checkpoint), corpus)
    _, retrieval = split_corpus(corpus, Path(args.corpus), split_seed(checkpoint))
    items = scoped_items(retrieval, _scope(args.scope))
    out = Path(args.out)
    save_index(out, index_corpus(checkpoint, list(items)))
    return _finish("index", argv, watch, out, config={"scope": _scope(args.scope).value},
                   inputs={"checkpoint": args.checkpoint, "corpus": args.corpus}, outputs={"index": out})


def cmd_query(args: argparse.Namespace, argv: Sequence[str]) -> int:
    watch = Stopwatch()
    checkpoint = load_checkpoint(Path(args.checkpoint))
    index = _index_for(checkpoint, Path(args.index))
    index = index.restrict(_scope(args.scope).modality)
    query = Query.parse(args.text)
    model = checkpoint.build_model()
    ranked = search(index, model.embed_texts([query.labels])[0], args.k)

    labels = index.labels_of()
    rows = [{"rank": rank, "id": item_id, "score": score, "relevance": graded_relevance(query.labels, labels[item_id])}
            for rank, (item_id, score) in enumerate(ranked, start=1)]
    table = pd.DataFrame(rows, columns=["rank", "id", "score", "relevance"])
    print(f"Query: {query.render()}  (top {len(ranked)} of {len(index)})")
    print(table.to_string(index=False, float_format=lambda v: f"{v:.6f}"))

    out = Path(args.out) if args.out else Path(args.index).with_name("query.csv")
    write_csv(out, table)
    return _finish("query", argv, watch, out, config={"query": query.render(), "k": args.k},
                   inputs={"checkpoint": args.checkpoint, "index": args.index}, outputs={"ranking": out})


# ============================================================================
# eval
# ============================================================================

def _save_report(report: MetricsReport, out_dir: Path, name: str) -> Dict[str, Path]:
    json_path, text_path = out_dir / f"{name}.json", out_dir / f"{name}.txt"
    report.save(json_path, text_path)
    print(report.to_text())
    return {f"{name}_json": json_path, f"{name}_text": text_path}


def cmd_eval(args: argparse.Namespace, argv: Sequence[str]) -> int:
    watch = Stopwatch()
    corpus = read_corpus(Path(args.corpus))
    if args.fuse:
        checkpoints = tuple(_checkpoint_for(Path(p), corpus) for p in args.fuse)
    elif args.checkpoint:
        checkpoints = (_checkpoint_for(Path(args.checkpoint), corpus),)
    else:
        raise ConfigError("eval needs --checkpoint or --fuse")
    _, retrieval = split_corpus(corpus, Path(args.corpus), split_seed(*checkpoints))
    out_dir = Path(args.out)
    outputs: Dict[str, Path] = {}

    if args.fuse:
        sar_ckpt, msi_ckpt = checkpoints
        sar_items = scoped_items(retrieval, Scope.SAR)
        msi_items = scoped_items(retrieval, Scope.MSI)
        indexes = (index_corpus(sar_ckpt, list(sar_items)), index_corpus(msi_ckpt, list(msi_items)))
        report = evaluate_retrieval((sar_ckpt, msi_ckpt), indexes, enumerate_queries(retrieval))
        outputs.update(_save_report(report, out_dir, "metrics_fused"))
        inputs = {"checkpoint_sar": args.fuse[0], "checkpoint_msi": args.fuse[1], "corpus": args.corpus}
    else:
        (checkpoint,) = checkpoints
        index = _index_for(checkpoint, Path(args.index) if args.index else None, retrieval)
        scopes = [_scope(args.scope)] if args.scope else list(Scope)
        for scope in scopes:
            items = scoped_items(retrieval, scope)
            if len(items) == 0:
                logger.warning(f"Scope {scope.value} holds no items, skipped")
                continue
            report = evaluate_retrieval(checkpoint, index, enumerate_queries(items), scope)
            outputs.update(_save_report(report, out_dir, f"metrics_{scope.value}"))
        inputs = {"checkpoint": args.checkpoint, "corpus": args.corpus}
    return _finish("eval", argv, watch, out_dir, config={"scope": args.scope or "all+sar+msi",
                                                         "fused": bool(args.fuse)},
                   inputs=inputs, outputs=outputs)


# ============================================================================
# classify / geo-probe
# ============================================================================

def cmd_classify(args: argparse.Namespace, argv: Sequence[str]) -> int:
    watch = Stopwatch()
    corpus = read_corpus(Path(args.corpus))
    checkpoint = _checkpoint_for(Path(args.checkpoint), corpus)
    _, retrieval = split_corpus(corpus, Path(args.corpus), split_seed(checkpoint))
    items = scoped_items(retrieval, _scope(args.scope))

    predictions, matrix = zero_shot_classify(checkpoint, list(items))
    truth = {item.id: item.labels for item in items}
    report = macro_prf(predictions, truth)
    report.threshold = matrix.threshold
    report.baseline = macro_prf(dummy_classifier(truth, k=2), truth)

    out_dir = Path(args.out)
    json_path, text_path = out_dir / "classification.json", out_dir / "classification.txt"
    report.save(json_path, text_path)
    print(report.to_text())
    return _finish("classify", argv, watch, out_dir, config={"scope": _scope(args.scope).value},
                   inputs={"checkpoint": args.checkpoint, "corpus": args.corpus},
                   outputs={"report_json": json_path, "report_text": text_path})


def cmd_geo_probe(args: argparse.Namespace, argv: Sequence[str]) -> int:
    watch = Stopwatch()
    corpus = read_corpus(Path(args.corpus))
    checkpoint = _checkpoint_for(Path(args.checkpoint), corpus)
    pairs = args.pairs or min(constants.DEFAULT_PROBE_PAIRS, len(corpus) // 2)
    seed = args.seed or 0

    result = spatial_probe(checkpoint, list(corpus), pairs, seed)
    out_dir = Path(args.out)
    json_path, csv_path = out_dir / "geo_probe.json", out_dir / "geo_probe.csv"
    result.save(json_path, csv_path)
    print(f"pearson={result.pearson:.4f} spearman={result.spearman:.4f} pairs={pairs}")
    return _finish("geo-probe", argv, watch, out_dir, config={"pairs": pairs}, seed=seed,
                   inputs={"checkpoint": args.checkpoint, "corpus": args.corpus},
                   outputs={"report": json_path, "distances": csv_path})


# ============================================================================
# sweep-alpha
# ============================================================================

def cmd_sweep_alpha(args: argparse.Namespace, argv: Sequence[str]) -> int:
    watch = Stopwatch()
    alphas = tuple(args.alphas) if args.alphas else constants.ALPHA_SWEEP
    if any(not 0.0 < alpha <= 1.0 for alpha in alphas):
        raise ConfigError(f"sweep alphas must lie in (0, 1]; alpha=0 discards the text alignment, got {alphas}")
    base = _train_config(args)
    corpus, train_items, retrieval = load_split_corpus(Path(args.corpus), base.seed)
    queries = enumerate_queries(retrieval)
    out_dir = Path(args.out)

    rows: List[Dict[str, Any]] = []
    for alpha in alphas:
        config = TrainConfig.from_dict({**base.to_dict(), "use_location": True, "alpha": alpha})
        result = train(config, list(train_items))
        save_checkpoint(out_dir / f"geoclosp_alpha{alpha:g}.ckpt", result.checkpoint)
        report = evaluate_retrieval(result.checkpoint, index_corpus(result.checkpoint, list(retrieval)), queries)
        row: Dict[str, Any] = {"alpha": alpha}
        row.update({metric_key("ndcg", k): report.mean[metric_key("ndcg", k)] for k in report.cutoffs})
        rows.append(row)
        logger.info(f"alpha={alpha}: " + ", ".join(f"{k}={v:.4f}" for k, v in row.items() if k != "alpha"))

    table = pd.DataFrame(rows)
    json_path = write_json(out_dir / "sweep_alpha.json",
                           {f"alpha={row['alpha']:g}.{k}": v for row in rows for k, v in row.items() if k != "alpha"})
    text_path = write_text(out_dir / "sweep_alpha.txt", table.to_string(index=False, float_format=lambda v: f"{v:.4f}") + "\n")
    print(table.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
    return _finish("sweep-alpha", argv, watch, out_dir, config={**base.to_dict(), "alphas": list(alphas)},
                   seed=base.seed, inputs={"corpus": args.corpus, "config": args.config or "<defaults>"},
                   outputs={"report_json": json_path, "report_text": text_path})
