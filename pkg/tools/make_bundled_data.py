"""One-off generator for the bundled LIBSVM-format fixtures.

Produces src/adastep/data/synth2000.libsvm (a separable 2000-row sparse
binary classification set) and
src/adastep/data/mini_corpus.libsvm (a 12-row parser fixture).  Rerun
only if the fixtures need to change; tests pin the file contents.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "adastep" / "data"

N_ROWS = 2000
DIM = 50
NNZ_PER_ROW = 10
FLIP_FRACTION = 0.0
MARGIN_LO, MARGIN_HI = 4.0, 8.0
SEED = 20240817


def make_synth(rng: np.random.Generator) -> str:
    # rows = label * margin * direction + sparse noise, margins in
    # [MARGIN_LO, MARGIN_HI]: separable with a wide margin, so the
    # regularized optimum has a small norm and a near-zero loss term
    direction = rng.normal(0.0, 1.0, size=DIM)
    direction /= np.linalg.norm(direction)
    lines = []
    n_flipped = 0
    for _ in range(N_ROWS):
        idx = np.sort(rng.choice(DIM, size=NNZ_PER_ROW, replace=False))
        label = 1 if rng.random() < 0.5 else -1
        margin = rng.uniform(MARGIN_LO, MARGIN_HI)
        vals = label * margin * direction[idx] + rng.normal(0.0, 0.5, size=NNZ_PER_ROW)
        if rng.random() < FLIP_FRACTION:
            label = -label
            n_flipped += 1
        feats = " ".join(f"{j + 1}:{v:.6g}" for j, v in zip(idx, vals))
        lines.append(f"{'+1' if label > 0 else '-1'} {feats}")
    if FLIP_FRACTION:
        print(f"flipped {n_flipped}/{N_ROWS} labels")
    return "\n".join(lines) + "\n"


MINI_CORPUS = """\
+1 1:0.5 3:-1.25 7:2.0
-1 2:1.0 4:0.333333
+1 5:-0.75
-1
+1 1:1e-3 6:1000.0 7:-0.001
-1 3:2.5 8:0.125
+1 2:-0.5 4:1.5 6:0.25
-1 1:3.0
+1 8:1.0
-1 2:0.1 3:0.2 4:0.3 5:0.4
+1 7:-2.25
-1 6:0.6666
"""


def main():
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(SEED)))
    (DATA_DIR / "synth2000.libsvm").write_text(make_synth(rng))
    (DATA_DIR / "mini_corpus.libsvm").write_text(MINI_CORPUS)
    print(f"wrote fixtures to {DATA_DIR}")


if __name__ == "__main__":
    main()
