"""Utilities module"""
from .logging_setup import configure_logging
from .reporting import ConsoleReporter, get_console_reporter

__all__ = ["configure_logging", "ConsoleReporter", "get_console_reporter"]
