"""
ATME Toolkit - Source Package

Estimação do efeito médio de moderação do tratamento (ATME) com tratamento
binário randomizado e moderador binário não randomizado.
"""

__version__ = "1.0.0"
__author__ = "Geon AI"
