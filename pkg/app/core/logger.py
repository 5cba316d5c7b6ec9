#!/usr/bin/env python3
"""
Centralized logging for asymcalc.
Every module logs through the `asymcalc` hierarchy; certificates and timings get their own
loggers so they can be audited separately from the calculus log.
"""

import logging
import logging.handlers
import sys
import threading
from pathlib import Path
from typing import Optional

from app.core.settings import settings


class AsymCalcLogger:
    """
    Singleton logging setup with:
    - Timestamp
    - File name
    - Function name
    - Line number
    - Log level
    - Message
    """

    _instance: Optional['AsymCalcLogger'] = None
    _lock = threading.Lock()
    _initialized: bool = False

    def __new__(cls):
        if cls._instance is None:
            with cls._lock:
                if cls._instance is None:
                    cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self):
        if not self._initialized:
            with self._lock:
                if not self._initialized:
                    self._setup_logging()
                    self._initialized = True

    def _setup_logging(self):
        """Setup centralized logging configuration"""
        self.logger = logging.getLogger('asymcalc')
        self.logger.setLevel(logging.DEBUG)

        # Clear any existing handlers to avoid duplicates
        self.logger.handlers.clear()

        self.detailed_formatter = logging.Formatter(
            fmt='%(asctime)s | %(filename)s:%(lineno)d | %(funcName)s() | %(levelname)s | %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        self.simple_formatter = logging.Formatter(
            fmt='%(asctime)s | %(levelname)s | %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        self.certification_logger = logging.getLogger('asymcalc.certification')
        self.certification_logger.setLevel(logging.INFO)
        self.certification_logger.propagate = False

        self.performance_logger = logging.getLogger('asymcalc.performance')
        self.performance_logger.setLevel(logging.INFO)
        self.performance_logger.propagate = False

        if settings.log_to_file:
            self._setup_file_handlers()

        self._setup_console_handler()

        # Prevent propagation to root logger
        self.logger.propagate = False

        self.logger.debug("AsymCalcLogger initialized successfully")

    def _rotating_handler(self, filename: str) -> logging.Handler:
        return logging.handlers.RotatingFileHandler(
            self.log_dir / filename,
            maxBytes=10 * 1024 * 1024,  # 10MB
            backupCount=5,
            encoding='utf-8'
        )

    def _setup_file_handlers(self):
        """Setup file handlers for the calculus, error, certification and performance logs"""
        self.log_dir = Path(settings.log_dir)
        self.log_dir.mkdir(parents=True, exist_ok=True)

        class NonErrorFilter(logging.Filter):
            def filter(self, record):
                return record.levelno < logging.ERROR

        main_file_handler = self._rotating_handler("calculus.log")
        main_file_handler.setLevel(logging.DEBUG)
        main_file_handler.addFilter(NonErrorFilter())
        main_file_handler.setFormatter(self.detailed_formatter)
        self.logger.addHandler(main_file_handler)

        error_file_handler = self._rotating_handler("errors.log")
        error_file_handler.setLevel(logging.ERROR)
        error_file_handler.setFormatter(self.detailed_formatter)
        self.logger.addHandler(error_file_handler)

        certification_handler = self._rotating_handler("certification.log")
        certification_handler.setFormatter(self.simple_formatter)
        self.certification_logger.addHandler(certification_handler)

        performance_handler = self._rotating_handler("performance.log")
        performance_handler.setFormatter(self.simple_formatter)
        self.performance_logger.addHandler(performance_handler)

    def _setup_console_handler(self):
        """Console handler on stderr; stdout is reserved for CLI output"""
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(getattr(logging, settings.console_log_level.upper(), logging.WARNING))
        console_handler.setFormatter(self.simple_formatter)
        self.logger.addHandler(console_handler)
        self.certification_logger.addHandler(console_handler)
        self.performance_logger.addHandler(console_handler)

    def get_logger(self, name: str = None) -> logging.Logger:
        """
        Get logger instance for a specific module

        Args:
            name: Module name (optional)

        Returns:
            Logger instance configured for the module
        """
        if name:
            return self.logger.getChild(name)
        return self.logger


# Global logger instance
logger_instance = AsymCalcLogger()


def get_logger(name: str = None) -> logging.Logger:
    return logger_instance.get_logger(name)


def get_seqcore_logger():
    return get_logger('seqcore')

def get_dists_logger():
    return get_logger('dists')

def get_amajor_logger():
    return get_logger('amajor')

def get_qfi_logger():
    return get_logger('qfi')

def get_channels_logger():
    return get_logger('channels')

def get_spectra_logger():
    return get_logger('spectra')

def get_bridge_logger():
    return get_logger('entbridge')

def get_cli_logger():
    return get_logger('cli')

def get_certification_logger():
    """Logger for certificates and oracle verdicts (certification.log)"""
    return logger_instance.certification_logger

def get_performance_logger():
    """Logger for timings of bisections, searches and rate runs (performance.log)"""
    return logger_instance.performance_logger
