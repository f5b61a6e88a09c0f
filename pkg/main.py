"""
qsmiles - Main Entry Point
==========================

Hybrid quantum-classical SMILES autoencoder: a tensor-product token embedding
feeds a simulated quantum autoencoder whose latent measurements drive an
attention LSTM decoder.

Usage:
    python main.py prepare --input raw.smi --output data/corpus.smi
    python main.py train --corpus data/corpus.smi --preset toy --out runs/toy
    python main.py eval --checkpoint runs/toy/checkpoint.json
    python main.py reconstruct --checkpoint runs/toy/checkpoint.json --smiles CCO
    python main.py inspect-circuit
    python main.py plot --metrics runs/toy/metrics.csv

Exit codes: 0 success, 1 user or input error, 2 internal error.
"""

import logging
import sys
from typing import List, Optional

from config import LOG_FILE
from errors import USER_ERRORS
from logging_setup import safe_log, setup_logging
from cli.cli_instance import EXIT_INTERNAL_ERROR, EXIT_USER_ERROR, create_parser

logger = logging.getLogger(__name__)


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one subcommand and map failures to exit codes."""
    parser = create_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level, LOG_FILE)

    try:
        return args.handler(args)
    except USER_ERRORS as e:
        safe_log(logger, "debug", f"❌ {type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USER_ERROR
    except KeyboardInterrupt:
        print("\n[STOP] Interrupted by user (Ctrl+C)", file=sys.stderr)
        return EXIT_INTERNAL_ERROR
    except Exception as e:
        logger.exception("Fatal error occurred")
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
