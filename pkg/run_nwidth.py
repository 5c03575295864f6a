# run_nwidth.py
# Runner for the nwidth command line from a source checkout

import os
import sys

# Ensure src is in the path
sys.path.insert(0, os.path.abspath('.'))

from src.cli import run
from src.algorithms.verification import PRESETS
from src.utils.config import ensure_results_dir, load_config


def run_demo(config):
    """Cantor set pipeline: generate, widths, dimension"""
    results_dir = ensure_results_dir(config)
    points = os.path.join(results_dir, "cantor-L12.csv")
    widths = os.path.join(results_dir, "cantor-L12-widths.csv")

    print("\n=== Cantor set, Laplace kernel ===")
    steps = [
        ["gen", "cantor", "--level", "12", "--out", points],
        ["widths", "--kernel", "family=laplace gamma=1", "--points", points, "-T", "200", "--out", widths],
        ["dim", "--widths", widths],
    ]
    for argv in steps:
        print("nwidth " + " ".join(argv))
        code = run(argv)
        if code:
            return code
    return 0


def main():
    """Forward arguments to the CLI, or show a menu when there are none"""
    if len(sys.argv) > 1:
        return run(sys.argv[1:])

    config = load_config()
    presets = sorted(PRESETS)

    while True:
        print("\n=== nwidth Runner ===")
        for i, name in enumerate(presets, start=1):
            print(f"{i}. Verify preset {name}")
        print(f"{len(presets) + 1}. Run the Cantor set demo")
        print(f"{len(presets) + 2}. Exit")

        choice = input(f"\nEnter your choice (1-{len(presets) + 2}): ")
        if not choice.isdigit():
            print("Invalid choice. Please try again.")
            continue

        index = int(choice)
        if 1 <= index <= len(presets):
            run(["verify", "--preset", presets[index - 1]])
        elif index == len(presets) + 1:
            run_demo(config)
        elif index == len(presets) + 2:
            print("Exiting...")
            return 0
        else:
            print("Invalid choice. Please try again.")


if __name__ == "__main__":
    sys.exit(main())
