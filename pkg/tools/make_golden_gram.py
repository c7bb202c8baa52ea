"""Freeze a golden Gram trace for the relu/centered chain.

Scalar-loop reference implementation, independent of the vectorized
library path: only the Gaussian stream is shared, so the frozen values
check the centering, normalization, activation, matmul and Gram math.
Writes tests/data/golden_gram_relu_centered.json.
"""

import json
import math
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from gramlab.rng import RngStream  # noqa: E402

MASTER_SEED = 424242
INPUT_ID = 7
TRIAL = 0
N, D, DEPTH = 3, 50, 2


def draw_matrix(stream, rows, cols, scale):
    flat = stream.gaussian(rows * cols)
    return [[flat[i * cols + j] * scale for j in range(cols)]
            for i in range(rows)]


def centered_normalize(h):
    out = []
    for row in h:
        n = len(row)
        mu = sum(row) / n
        c = [v - mu for v in row]
        ms = sum(v * v for v in c) / n
        if ms <= 0.0:
            raise SystemExit("degenerate row in golden input")
        s = 1.0 / math.sqrt(ms)
        out.append([v * s for v in c])
    return out


def relu(h):
    return [[v if v > 0.0 else 0.0 for v in row] for row in h]


def gram_of(x, d):
    n = len(x[0])
    g = [[0.0] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            acc = 0.0
            for i in range(d):
                acc += x[i][a] * x[i][b]
            g[a][b] = acc / d
    return g


def matmul(w, x):
    rows, inner, cols = len(w), len(x), len(x[0])
    out = [[0.0] * cols for _ in range(rows)]
    for i in range(rows):
        wi = w[i]
        for j in range(cols):
            acc = 0.0
            for k in range(inner):
                acc += wi[k] * x[k][j]
            out[i][j] = acc
    return out


def main():
    h = draw_matrix(RngStream(MASTER_SEED, INPUT_ID), D, N, 1.0)
    wstream = RngStream(MASTER_SEED, TRIAL)
    grams = []
    for layer in range(DEPTH + 1):
        x = relu(centered_normalize(h))
        grams.append(gram_of(x, D))
        if layer < DEPTH:
            w = draw_matrix(wstream, D, D, math.sqrt(1.0 / D))
            h = matmul(w, x)
    payload = {
        "master_seed": MASTER_SEED,
        "input_stream_id": INPUT_ID,
        "trial": TRIAL,
        "n": N,
        "d": D,
        "depth": DEPTH,
        "activation": "relu",
        "norm": "centered",
        "grams": grams,
    }
    out = os.path.join(os.path.dirname(__file__), "..", "tests", "data",
                       "golden_gram_relu_centered.json")
    os.makedirs(os.path.dirname(out), exist_ok=True)
    with open(out, "w") as fh:
        json.dump(payload, fh, indent=1)
    print("wrote", os.path.normpath(out))
    for layer, g in enumerate(grams):
        print("layer", layer, "diag", [round(g[i][i], 6) for i in range(N)],
              "trace", round(sum(g[i][i] for i in range(N)), 6))


if __name__ == "__main__":
    main()
