"""Run every recipe in recipes/ (or the ones named on the command line).

    python3 scripts/run_recipes.py                 # all of them, outputs under runs/
    python3 scripts/run_recipes.py joint_hot spacetime   # name prefixes
"""
import argparse
import glob
import os
import sys
import time

from chirpspdc.cli import main

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..")


def recipes(prefixes):
    paths = sorted(glob.glob(os.path.join(ROOT, "recipes", "*.conf")))
    if prefixes:
        paths = [p for p in paths if any(os.path.basename(p).startswith(x) for x in prefixes)]
    return paths


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("prefix", nargs="*")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    os.chdir(ROOT)
    status = 0
    for path in recipes(args.prefix):
        text = open(path).read()
        command = "sweep" if "[sweep]" in text else "run"
        t = time.perf_counter()
        code = main([command, path, "--threads", str(args.threads)])
        print(f"{os.path.basename(path):40s} {command:5s} exit {code}  {time.perf_counter() - t:7.1f} s", flush=True)
        status = status or code
    sys.exit(status)
