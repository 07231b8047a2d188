"""Batch front end: config loading, task execution and report emission."""

from .config import ConfigError, RunConfig, load_config, parse_config
from .emit import ScanReport, emit_report, parse_records
from .main import execute, main, run_config

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config", "ScanReport", "emit_report",
           "parse_records", "execute", "main", "run_config"]
