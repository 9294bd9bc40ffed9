#!/usr/bin/env python3
"""Time the compiled kernels against the numpy fallback.

Each kernel runs under a forced backend; the last column is the mode
(``auto``) the library picks by default for that dimension.

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --dims 8 32 128 --classes 5000 --repeat 5
"""
import argparse
import time

import numpy as np

from tcplda import _backend
from tcplda.em import TrainConfig, train_from_stats
from tcplda.stats import accumulate_stats
from tcplda.synth import SynthSpec, generate, random_spd


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases(d, K, max_n, seed):
    rng = np.random.default_rng(seed)
    phi_b, phi_w = random_spd(d, rng), random_spd(d, rng)
    counts = rng.integers(1, max_n + 1, K).tolist()
    data = generate(SynthSpec(np.zeros(d), phi_b, phi_w, K, counts, seed))
    idx, labels = data.class_index()
    st = accumulate_stats(data)
    prec_b, prec_w = np.linalg.inv(phi_b), np.linalg.inv(phi_w)
    centered = np.ascontiguousarray(st.centered)
    small = [random_spd(d, rng) for _ in range(200)]

    def spd_batch(kern):
        for a in small:
            kern.inverse_spd(a)
            kern.logdet_spd(a)

    return {
        "inverse+logdet x200": lambda k: spd_batch(k),
        "accumulate": lambda k: k.accumulate(data.vectors, idx, len(labels)),
        "em_sweep": lambda k: k.em_sweep(prec_b, prec_w, st.counts, centered),
        "marginal_terms": lambda k: k.marginal_terms(phi_b, phi_w, st.counts, centered),
        "train 10 iters": lambda k: train_from_stats(st, TrainConfig(iterations=10)),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--dims", type=int, nargs="+", default=[8, 32, 100])
    parser.add_argument("--classes", type=int, default=2000)
    parser.add_argument("--max-per-class", type=int, default=20)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    names = _backend.available()
    print(f"backends: {', '.join(names)}; K={args.classes}, n_k in [1, {args.max_per_class}], "
          f"auto uses compiled kernels for d <= {_backend.AUTO_MAX_DIM}")
    header = f"{'d':>4}  {'kernel':<20}" + "".join(f"{n + ' (ms)':>14}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}{'auto':>8}"
    print(header)
    for d in args.dims:
        for label, fn in cases(d, args.classes, args.max_per_class, args.seed).items():
            row = []
            for name in names:
                previous = _backend.use(name)
                try:
                    kern = _backend.kernels(d)
                    row.append(best_of(lambda: fn(kern), args.repeat))
                finally:
                    _backend.use(previous)
            line = f"{d:>4}  {label:<20}" + "".join(f"{t * 1e3:>14.3f}" for t in row)
            if len(row) == 2:
                line += f"{row[1] / row[0]:>9.2f}x{_backend.kernels(d).NAME if _backend.mode() == 'auto' else '':>8}"
            print(line)


if __name__ == "__main__":
    main()
