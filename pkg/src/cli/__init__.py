"""
CLI Package

Interface em lote: leitura de CSV, despacho dos comandos e gravação dos relatórios.
"""

from .app import build_parser, parse_config, run
from .io import parse_grid, read_csv, read_grouped_csv, write_report

__all__ = ["build_parser", "parse_config", "run", "parse_grid", "read_csv", "read_grouped_csv", "write_report"]
