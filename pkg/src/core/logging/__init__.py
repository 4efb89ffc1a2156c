"""
Logging Package

Sistema de logging configurável por ambiente.
"""

from .logger import get_user_friendly_error, setup_logging

__all__ = ["setup_logging", "get_user_friendly_error"]
