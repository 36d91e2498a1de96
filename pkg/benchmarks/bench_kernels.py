"""Compare the compiled and pure-Python kernels on the bundled Canada series.

    python benchmarks/bench_kernels.py [--repeat N]

The backend is chosen at import, so each backend runs in its own subprocess.
"""
import argparse
import json
import os
import subprocess
import sys
import timeit
from pathlib import Path

SERIES = Path(__file__).resolve().parents[1] / "tests" / "data" / "canada_cdiac_1960_2012.csv"

CHILD = r"""
import json, sys, timeit
from co2forecast import BACKEND
from co2forecast.forest import fit_forest
from co2forecast.ingest import read_series_csv
from co2forecast.svr import fit_svr
from co2forecast.cart import fit_tree
data = read_series_csv(open(sys.argv[1], "rb").read()).to_dataset()
repeat = int(sys.argv[2])
cases = {
    "tree": lambda: fit_tree(data),
    "forest(100)": lambda: fit_forest(data, n_trees=100),
    "svr(rbf)": lambda: fit_svr(data),
}
out = {"backend": BACKEND}
for name, fn in cases.items():
    out[name] = min(timeit.repeat(fn, number=1, repeat=repeat))
print(json.dumps(out))
"""


def run(pure: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("CO2FORECAST_PURE_PYTHON", None)
    if pure:
        env["CO2FORECAST_PURE_PYTHON"] = "1"
    proc = subprocess.run([sys.executable, "-c", CHILD, str(SERIES), str(repeat)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    fast, slow = run(False, args.repeat), run(True, args.repeat)
    if fast["backend"] != "cython":
        print("compiled extension not built; only the Python backend is available")
    print(f"{'case':<14}{fast['backend']:>12}{'python':>12}{'speedup':>10}")
    for case in (k for k in slow if k != "backend"):
        print(f"{case:<14}{fast[case] * 1e3:>10.2f}ms{slow[case] * 1e3:>10.2f}ms"
              f"{slow[case] / fast[case]:>9.1f}x")


if __name__ == "__main__":
    main()
