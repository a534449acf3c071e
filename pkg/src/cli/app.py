"""
Command-line Application
========================

argparse 子命令入口与退出码映射:

- 0: 成功
- 2: 用法、配置、数据、格式、词表或契约错误
- 3: 数值错误 (训练中出现 NaN / Inf)
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from loguru import logger

from cli import commands
from cli.manifest import RunManifest
from config import constants
from core.errors import ClospError, ConfigError, NumericError


Handler = Callable[[argparse.Namespace, Sequence[str]], int]


def cmd_replay(args: argparse.Namespace, argv: Sequence[str]) -> int:
    """按清单记录的子命令参数重新执行"""
    manifest = RunManifest.load(Path(args.manifest))
    if manifest.command == "replay":
        raise ConfigError("refusing to replay a replay manifest")
    logger.info(f"Replaying '{manifest.command}' recorded by {manifest.tool_version}")
    return dispatch(manifest.argv)


HANDLERS: Dict[str, Handler] = {
    "gen-corpus": commands.cmd_gen_corpus,
    "train": commands.cmd_train,
    "index": commands.cmd_index,
    "query": commands.cmd_query,
    "eval": commands.cmd_eval,
    "classify": commands.cmd_classify,
    "geo-probe": commands.cmd_geo_probe,
    "sweep-alpha": commands.cmd_sweep_alpha,
    "replay": cmd_replay,
}


class _Parser(argparse.ArgumentParser):
    """用法错误抛出异常而不是直接退出，由 run() 统一映射退出码"""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


class UsageError(ClospError):
    """命令行参数错误"""


def _add_common(parser: argparse.ArgumentParser, config: bool = True) -> None:
    parser.add_argument("--seed", type=int, default=None, help="Random seed (default: from config or 0)")
    if config:
        parser.add_argument("--config", default=None, help="Flat YAML configuration file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="closp",
        description=f"{constants.APP_NAME} - text-to-image retrieval over SAR and multispectral imagery",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py gen-corpus --out data/corpus
  python main.py train --corpus data/corpus --out runs/closp.ckpt
  python main.py train --corpus data/corpus --out runs/geoclosp.ckpt --use-location --alpha 0.5
  python main.py eval --checkpoint runs/closp.ckpt --corpus data/corpus --out runs/eval
  python main.py query "trees, water" --checkpoint runs/closp.ckpt --index runs/closp.idx
        """,
    )
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        default=constants.DEFAULT_LOG_LEVEL,
                        help=f"Log level (default: {constants.DEFAULT_LOG_LEVEL})")
    parser.add_argument("--log-file", default=None, help="Also write logs to logs/<name>")
    parser.add_argument("--version", "-v", action="version",
                        version=f"{constants.APP_NAME} v{constants.APP_VERSION}")
    sub = parser.add_subparsers(dest="command", metavar="<command>")
    sub.required = True

    p = sub.add_parser("gen-corpus", help="Generate a synthetic labelled corpus and its split")
    _add_common(p)
    p.add_argument("--out", required=True, help="Output corpus directory")

    p = sub.add_parser("train", help="Train a CLOSP / GeoCLOSP model")
    _add_common(p)
    p.add_argument("--corpus", required=True, help="Corpus directory")
    p.add_argument("--out", required=True, help="Checkpoint file")
    p.add_argument("--alpha", type=float, default=None, help="Semantic weight of the GeoCLOSP loss")
    p.add_argument("--use-location", action="store_true", help="Add the location alignment (GeoCLOSP)")
    p.add_argument("--modalities", choices=["joint", "sar", "msi"], default=None,
                   help="Train jointly or on a single modality")

    p = sub.add_parser("index", help="Embed the retrieval corpus and save the index")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--scope", choices=["all", "sar", "msi"], default="all")
    p.add_argument("--out", required=True, help="Index file")

    p = sub.add_parser("query", help="Run one text query against a saved index")
    p.add_argument("text", help="Comma-separated labels, e.g. 'trees, water'")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--k", type=int, default=constants.DEFAULT_TOP_K)
    p.add_argument("--scope", choices=["all", "sar", "msi"], default="all")
    p.add_argument("--out", default=None, help="Ranking CSV (default: query.csv beside the index)")

    p = sub.add_parser("eval", help="Evaluate retrieval with nDCG / precision / recall")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--index", default=None, help="Saved index (default: embed the retrieval split)")
    p.add_argument("--corpus", required=True)
    p.add_argument("--scope", choices=["all", "sar", "msi"], default=None,
                   help="Index scope (default: all three)")
    p.add_argument("--fuse", nargs=2, metavar=("CKPT_SAR", "CKPT_MSI"), default=None,
                   help="Fuse two single-modality models")
    p.add_argument("--out", required=True, help="Report directory")

    p = sub.add_parser("classify", help="Zero-shot multi-label classification")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--scope", choices=["all", "sar", "msi"], default="all")
    p.add_argument("--out", required=True, help="Report directory")

    p = sub.add_parser("geo-probe", help="Correlate embedding and geographic distances")
    _add_common(p, config=False)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--pairs", type=int, default=None,
                   help=f"Pairs to draw (default: min({constants.DEFAULT_PROBE_PAIRS}, |corpus|/2))")
    p.add_argument("--out", required=True, help="Report directory")

    p = sub.add_parser("sweep-alpha", help="Train GeoCLOSP for several alpha values and compare nDCG")
    _add_common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--alphas", type=float, nargs="+", default=None,
                   help=f"Alpha values (default: {' '.join(str(a) for a in constants.ALPHA_SWEEP)})")
    p.add_argument("--out", required=True, help="Output directory")

    p = sub.add_parser("replay", help="Re-run the command recorded in a manifest")
    p.add_argument("manifest", help="Manifest YAML file")
    return parser


def _split_global(argv: Sequence[str]) -> List[str]:
    """去掉全局日志参数，清单中只保留子命令参数"""
    rest: List[str] = []
    skip = False
    for token in argv:
        if skip:
            skip = False
            continue
        if token in ("--log-level", "--log-file"):
            skip = True
            continue
        if token.startswith("--log-level=") or token.startswith("--log-file="):
            continue
        rest.append(token)
    return rest


def dispatch(argv: Sequence[str]) -> int:
    """解析并执行一个子命令 (不处理异常)"""
    args = build_parser().parse_args(list(argv))
    return HANDLERS[args.command](args, _split_global(argv))


def run(argv: Optional[Sequence[str]] = None, on_args: Optional[Callable[[argparse.Namespace], None]] = None) -> int:
    """
    执行命令行并返回退出码

    Args:
        argv: 参数列表，默认 sys.argv[1:]
        on_args: 解析成功后的回调 (main.py 用它配置日志)
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if on_args is not None:
            on_args(args)
        return HANDLERS[args.command](args, _split_global(argv))
    except NumericError as exc:
        logger.error(f"Numeric failure: {exc}")
        return constants.EXIT_NUMERIC
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return constants.EXIT_USAGE
    except (ClospError, FileNotFoundError) as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return constants.EXIT_USAGE
