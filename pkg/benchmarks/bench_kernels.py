"""Time the numba and pure-numpy kernel backends on a synthetic corpus.

    python3 benchmarks/bench_kernels.py --per-label 200 --epochs 20

Each backend is warmed up once (so numba compile time is excluded), then timed
over ``--repeat`` runs; the best time is reported. Weights from both backends
are compared at the end.
"""

import argparse
import time

import numpy as np

from gdpraudit import _kernels, synthetic
from gdpraudit.classifier import TrainingConfig, predict, train
from gdpraudit.evaluation import evaluate
from gdpraudit.labels import ALL_LABELS, LABEL_INDEX


def best_of(fn, repeat):
    fn()  # warm-up
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--per-label", type=int, default=100, help="sentences per label")
    ap.add_argument("--epochs", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    data = synthetic.annotated_corpus(args.per_label, seed=args.seed)
    sentences = [d.sentence for d in data]
    config = TrainingConfig(epochs=args.epochs)
    rng = np.random.default_rng(args.seed)
    true_idx = rng.integers(0, len(ALL_LABELS), size=200_000)
    pred_idx = rng.integers(0, len(ALL_LABELS), size=200_000)
    print(f"{len(data)} sentences, {args.epochs} epochs, best of {args.repeat}")

    backends = ["numba", "numpy"] if _kernels.HAVE_NUMBA else ["numpy"]
    models = {}
    rows = []
    previous = _kernels.BACKEND
    try:
        for name in backends:
            _kernels.set_backend(name)
            models[name] = train(data, config, seed=args.seed)
            t_train = best_of(lambda: train(data, config, seed=args.seed), args.repeat)
            t_pred = best_of(lambda: predict(models[name], sentences), args.repeat)
            t_conf = best_of(lambda: _kernels.confusion_counts(true_idx, pred_idx, len(ALL_LABELS)), args.repeat)
            rows.append((name, t_train, t_pred, t_conf))
    finally:
        _kernels.set_backend(previous)

    print(f"{'backend':<8} {'train s':>9} {'predict s':>10} {'confusion s':>12}")
    for name, *ts in rows:
        print(f"{name:<8} {ts[0]:9.3f} {ts[1]:10.3f} {ts[2]:12.4f}")
    if len(rows) == 2:
        (_, *a), (_, *b) = rows
        print(f"{'speedup':<8} {b[0] / a[0]:9.1f}x {b[1] / a[1]:9.1f}x {b[2] / a[2]:11.1f}x")
        diff = np.abs(models["numba"].weights - models["numpy"].weights).max()
        print(f"max |w_numba - w_numpy| = {diff:.2e}")

    model = models[backends[0]]
    report = evaluate(data, predict(model, sentences))
    print(f"training-set macro-F {report.macro.f1:.3f} "
          f"(labels: {', '.join(lb.value for lb in sorted(model.label_set, key=LABEL_INDEX.get))})")


if __name__ == "__main__":
    main()
