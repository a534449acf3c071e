"""
Command-line interface
"""

from cli.app import build_parser, dispatch, run
from cli.manifest import RunManifest, manifest_path

__all__ = ["build_parser", "dispatch", "run", "RunManifest", "manifest_path"]
