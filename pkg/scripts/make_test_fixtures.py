"""Regenerate the committed CLI fixtures in tests/data (seeded, deterministic)."""
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "tests" / "data"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240607)
    x = rng.normal(0.0, 1.0, (60, 2))
    y = rng.normal(0.0, 1.0, (60, 2))
    y[:, 0] += 3.0
    np.savetxt(OUT / "shift_x.csv", x, delimiter=",", fmt="%.17g")
    np.savetxt(OUT / "shift_y.csv", y, delimiter=",", fmt="%.17g")


if __name__ == "__main__":
    main()
