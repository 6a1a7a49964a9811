"""Benchmark the compiled boosting kernels against the pure-Python twins.

Usage: python benchmarks/bench_kernels.py [--rows N] [--features F]

Covers the two hot paths behind GBDT training and prediction (split-gain
scan and ensemble traversal) plus an end-to-end train/predict comparison,
and verifies that both backends produce identical outputs while timing
them.
"""

import argparse
import random
import time

import numpy as np

from satguide.gbdt import GbdtParams, backend, predict, train_gbdt


def make_dataset(rng, rows, features, fill=0.2):
    data = []
    for _ in range(rows):
        nnz = max(1, int(fill * features * rng.random()))
        items = {f: float(rng.randint(1, 6))
                 for f in rng.sample(range(features), nnz)}
        idx = np.array(sorted(items), dtype=np.int64)
        val = np.array([items[i] for i in sorted(items)], dtype=np.float64)
        data.append(((idx, val), int(rng.random() < 0.5)))
    data[0] = (data[0][0], 0)
    data[1] = (data[1][0], 1)
    return data


def time_backend(name, fn, repeats=3):
    backend.set_backend(name)
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=400)
    ap.add_argument("--features", type=int, default=60)
    ap.add_argument("--predict-calls", type=int, default=2000)
    args = ap.parse_args()

    if "compiled" not in backend.available_backends():
        print("compiled kernels not built; run pip install -e . first")
        return

    rng = random.Random(0)
    data = make_dataset(rng, args.rows, args.features)
    params = GbdtParams(growth="leaf", depth=8, leaves=64, rounds=10)

    t_comp, model_c = time_backend("compiled", lambda: train_gbdt(data, params))
    t_pure, model_p = time_backend("pure", lambda: train_gbdt(data, params))
    assert model_c.trees == model_p.trees, "backends disagree"

    probes = [row for row, _ in data[:args.predict_calls]]
    while len(probes) < args.predict_calls:
        probes = probes + probes
    probes = probes[:args.predict_calls]

    def predict_all():
        backend_sum = 0.0
        for row in probes:
            backend_sum += predict(model_c, row)
        return backend_sum

    p_comp, s1 = time_backend("compiled", predict_all)
    p_pure, s2 = time_backend("pure", predict_all)
    assert s1 == s2, "backends disagree on predictions"
    backend.set_backend("compiled")

    print(f"dataset: {args.rows} rows x {args.features} features, "
          f"{params.rounds} rounds, leaves {params.leaves}")
    print(f"{'kernel':<22}{'compiled':>12}{'pure':>12}{'speedup':>10}")
    print(f"{'train (total)':<22}{t_comp:>11.3f}s{t_pure:>11.3f}s"
          f"{t_pure / t_comp:>9.1f}x")
    print(f"{'predict x' + str(len(probes)):<22}{p_comp:>11.3f}s"
          f"{p_pure:>11.3f}s{p_pure / p_comp:>9.1f}x")


if __name__ == "__main__":
    main()
