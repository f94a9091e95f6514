"""Run the standard corpus and write the JSON report (same as ``qtk corpus``).

    python scripts/run_corpus.py --sizes medium --seed 0 --out corpus.json
"""
import sys

from qtk.cli import main

if __name__ == "__main__":
    sys.exit(main(["corpus", *sys.argv[1:]]))
