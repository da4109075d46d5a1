"""Time load + validate + export on synthetic datasets of growing size.

    python3 scripts/bench.py --buildings 5 10 20 --meters 15 --repeat 3
"""

import argparse
import random
import tempfile
import time
from pathlib import Path

from nilm_meta.canonical import export_dataset
from nilm_meta.synth import SynthConfig, generate_folder, write_folder
from nilm_meta.typedb import seed_library
from nilm_meta.validate import validate_path


def run_once(folder: Path, library) -> tuple[float, int, int]:
    start = time.perf_counter()
    dataset, report = validate_path(folder, library)
    export_dataset(dataset, library)
    return time.perf_counter() - start, report.errors, report.warnings


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--buildings", type=int, nargs="+", default=[1, 5, 10, 20])
    parser.add_argument("--meters", type=int, default=15, help="meters per building")
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    library = seed_library()
    print(f"{'buildings':>9} {'meters':>7} {'best s':>8} {'errors':>6} {'warnings':>8}")
    with tempfile.TemporaryDirectory() as tmp:
        for n in args.buildings:
            cfg = SynthConfig(buildings=n, meters_per_building=(args.meters, args.meters),
                              appliances_per_meter=(1, 3))
            folder = write_folder(Path(tmp) / f"b{n}",
                                  *generate_folder(random.Random(args.seed), cfg))
            runs = [run_once(folder, library) for _ in range(args.repeat)]
            best = min(r[0] for r in runs)
            _, errors, warnings = runs[0]
            print(f"{n:>9} {n * args.meters:>7} {best:>8.3f} {errors:>6} {warnings:>8}")


if __name__ == "__main__":
    main()
