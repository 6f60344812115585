#!/usr/bin/env python3
"""
slpt - Sequence-Labeling Polarity Toolkit
Main entry point.

Pipeline:
    CoNLL-U treebank <-> per-token labels (abs | rel | pos encodings)
    raw reviews -> tokenize -> frequency tagger -> total decoder -> trees
    trees + dictionaries -> compositional polarity -> review labels

Usage:
    python main.py encode --input train.conllu --encoding rel --out train.labels.tsv
    python main.py analyze --input reviews.conllu --dict socal.tsv --trace
    python main.py bench --input reviews.conllu --dict socal.tsv --repetitions 5
"""

import logging
import sys
from pathlib import Path

# Add scripts to path
sys.path.insert(0, str(Path(__file__).parent / 'scripts'))

from cli import main


if __name__ == '__main__':
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n\nInterrupted by user", file=sys.stderr)
        sys.exit(130)  # Standard exit code for SIGINT
    except Exception as e:
        logging.error(f"Unexpected error: {e}", exc_info=True)
        sys.exit(1)
