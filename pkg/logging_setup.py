"""
Logging setup
=============

Console/file logging shared by the entry point and services.
"""

import logging
import sys
from typing import Optional


def setup_logging(level: str = "INFO", log_file: Optional[str] = None):
    """
    Setup logging with Windows encoding safety.

    Console output goes to stderr so that data printed on stdout stays parseable.

    Args:
        level: Root log level name
        log_file: Optional UTF-8 log file; empty or None disables it
    """
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)

    # Try to set UTF-8 encoding for console, fallback to errors='replace'
    try:
        if hasattr(sys.stderr, 'reconfigure'):
            sys.stderr.reconfigure(encoding='utf-8', errors='replace')
    except (AttributeError, ValueError, OSError):
        pass

    root_logger = logging.getLogger()
    root_logger.setLevel(getattr(logging, level.upper(), logging.INFO))
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)
    root_logger.addHandler(console_handler)

    if log_file:
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)


_EMOJI_FALLBACKS = {
    '✅': '[CHECK]',
    '❌': '[X]',
    '⚠️': '[WARNING]',
    '📊': '[CHART]',
    '💾': '[SAVE]',
    '🧪': '[TEST]',
    '🔧': '[WRENCH]',
    '🛑': '[STOP]',
    '⚛️': '[QUANTUM]',
    '📈': '[PLOT]',
}


def safe_log(logger, level, message):
    """Safely log message with emoji fallback for Windows."""
    try:
        getattr(logger, level)(message)
    except UnicodeEncodeError:
        safe_message = message
        for emoji, text in _EMOJI_FALLBACKS.items():
            safe_message = safe_message.replace(emoji, text)
        getattr(logger, level)(safe_message)
