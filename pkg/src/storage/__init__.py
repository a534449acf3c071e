"""
storage
=======

二进制容器 (检查点 CLSP / 索引 CLSI) 与语料库目录的读写。

检查点与索引的读写分别位于 storage.checkpoint 与 storage.index。
"""

from .container import ContainerHeader, read_container, read_header, write_container
from .corpus_io import read_corpus, read_split, write_corpus, write_split

__all__ = [
    "ContainerHeader",
    "read_container",
    "read_header",
    "write_container",
    "read_corpus",
    "read_split",
    "write_corpus",
    "write_split",
]
