"""Benchmark harness: suites, first-crossing records, profiles, CSV/JSON output."""
from .config import DEFAULT_SUITE, SuiteConfig, default_suite, load_suite, parse_suite
from .serialize import CSV_HEADER, emit, read_csv, read_json, to_csv, to_json
from .profile import THETAS, performance_profile
from .runner import BenchRecord, run_cell, run_suite

__all__ = ["DEFAULT_SUITE", "SuiteConfig", "default_suite", "load_suite", "parse_suite",
           "CSV_HEADER", "emit", "read_csv", "read_json", "to_csv", "to_json", "THETAS",
           "performance_profile", "BenchRecord", "run_cell", "run_suite"]
