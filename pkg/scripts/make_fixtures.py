"""Regenerate the bundled demo fixtures.

Everything here is synthetic and seeded; rerunning the script reproduces the
shipped files byte for byte.  Two datasets are written:

* ``setting_ii_n5000.csv`` -- 5000 p-value-like observations from the mixture
  0.1 * Beta(1, 10) + 0.9 * Uniform(0, 1).  The elbow estimate on this file
  should land near 0.1; the script checks that before writing.
* ``velocities_n1200.csv`` plus ``velocity_background.csv`` -- a
  stellar-velocity style example where the background is only available as a
  tabulated CDF.  The contamination model is a two-component normal mixture
  (a stand-in for a foreground population); the signal is a narrow cluster
  at 222 km/s mixed in with proportion 0.35.
"""

import argparse
import csv
import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from mixsep import (  # noqa: E402
    Beta,
    Normal,
    SortedSample,
    Tabulated,
    Uniform,
    criterion_curve,
    elbow_estimate,
    stream,
)

SETTING_II_KEY = 991
VELOCITY_KEY = 992


def write_setting_ii(out_dir: pathlib.Path, n: int = 5000, alpha: float = 0.1) -> pathlib.Path:
    rng = stream(1729, SETTING_II_KEY)
    signal = Beta(1.0, 10.0)
    mask = rng.random(n) < alpha
    data = np.where(mask, signal.sample(n, rng), rng.random(n))

    sample = SortedSample.from_data(data)
    curve = criterion_curve(sample, Uniform(), grid_size=200)
    tilde = elbow_estimate(curve)
    if not 0.06 <= tilde <= 0.14:
        raise SystemExit(f"fixture sanity check failed: elbow {tilde:.4f} not near 0.1")

    path = out_dir / "setting_ii_n5000.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["p_value"])
        for v in data:
            w.writerow([repr(float(v))])
    print(f"wrote {path}  (n={n}, alpha={alpha}, elbow check {tilde:.4f})")
    return path


def _contamination_cdf(xs: np.ndarray) -> np.ndarray:
    # known two-component foreground model; weights sum to 1
    a = Normal(60.0, 45.0)
    b = Normal(150.0, 60.0)
    return 0.6 * a.cdf(xs) + 0.4 * b.cdf(xs)


def write_velocities(out_dir: pathlib.Path, n: int = 1200, alpha: float = 0.35) -> None:
    rng = stream(1729, VELOCITY_KEY)
    # right edge far enough out that the tabulated CDF closes at 1.0
    grid = np.linspace(-150.0, 520.0, 1341)
    table_path = out_dir / "velocity_background.csv"
    with open(table_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["velocity_km_s", "cdf"])
        for x, v in zip(grid, _contamination_cdf(grid)):
            w.writerow([repr(float(x)), repr(float(v))])

    cluster = Normal(222.0, 9.0)
    is_member = rng.random(n) < alpha
    pick_a = rng.random(n) < 0.6
    background = np.where(pick_a,
                          Normal(60.0, 45.0).sample(n, rng),
                          Normal(150.0, 60.0).sample(n, rng))
    data = np.where(is_member, cluster.sample(n, rng), background)

    data_path = out_dir / "velocities_n1200.csv"
    with open(data_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["velocity_km_s"])
        for v in data:
            w.writerow([repr(float(v))])

    # sanity: the tabulated background must reproduce the analytic CDF
    table = Tabulated(grid, _contamination_cdf(grid))
    gap = np.max(np.abs(table.cdf(data) - _contamination_cdf(data)))
    print(f"wrote {table_path} and {data_path}  (n={n}, alpha={alpha}, "
          f"table interp gap {gap:.2e})")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default=str(pathlib.Path(__file__).resolve().parent.parent / "fixtures"))
    args = ap.parse_args()
    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_setting_ii(out_dir)
    write_velocities(out_dir)


if __name__ == "__main__":
    main()
