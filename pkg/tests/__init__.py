"""
Tests Package

Testes dos estimadores de ATME, da simulação, da sensibilidade e da CLI.
"""
