"""Rebuild the committed CLI fixtures: ``python tests/data/regenerate.py``."""

import contextlib
import io
import pathlib
import sys

import numpy as np

HERE = pathlib.Path(__file__).parent
sys.path.insert(0, str(HERE.parent))

from conftest import P_STAR  # noqa: E402
from fcompare import cli, rng, tally  # noqa: E402
from fcompare.montecarlo import sample_test_set  # noqa: E402

SEED = 2026


def main():
    counts = sample_test_set(P_STAR, 1000, SEED)
    recs = np.array([(z, a, b) for z in (0, 1) for a in (0, 1) for b in (0, 1)
                     for _ in range(counts.cells[z, a, b])])
    recs = recs[rng.stream(SEED).permutation(len(recs))]
    tally.write_csv(recs, HERE / "pstar_1000.csv")
    for method in ("jvesr", "independent"):
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            cli.main(["compare", str(HERE / "pstar_1000.csv"), "--method", method,
                      "--format", "json"])
        (HERE / f"pstar_1000_{method}.json").write_text(buf.getvalue())


if __name__ == "__main__":
    main()
