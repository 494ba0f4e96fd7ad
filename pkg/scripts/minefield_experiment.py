"""Noisy minefield: misclassification of K-means_w against the intensity baseline.

Sweeps filters and weights over several noise seeds and prints medians.

    python3 scripts/minefield_experiment.py --seeds 20 --noise 0.25 --csv out.csv
"""
import argparse
import csv
import logging
import sys

import numpy as np

from waveseg import (
    PhantomSpec,
    WeightingConfig,
    apply_weighting,
    builtin_filter_pair,
    feature_field,
    fcm_w,
    kmeans_w,
    make_phantom,
    misclassification,
    otsu_binarize,
)


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--noise", type=float, default=0.25)
    p.add_argument("--filters", nargs="+", default=["o1", "o1_signfix", "bio1", "bio2"])
    p.add_argument("--weights", nargs="+", type=float, default=[0.5, 1.0, 2.0])
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--algo", choices=("kmeans", "fcm"), default="kmeans")
    p.add_argument("--csv", default=None, help="write per-seed rows here")
    return p.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    logging.basicConfig(level=logging.ERROR)
    cluster = kmeans_w if args.algo == "kmeans" else fcm_w
    images = [make_phantom(PhantomSpec(kind="minefield", noise_sigma=args.noise, seed=s))
              for s in range(args.seeds)]
    rows = []

    def score(method, labels, seed):
        rate = misclassification(labels, images[seed].truth, 2).misclassification_rate
        rows.append({"method": method, "seed": seed, "rate": rate})

    for s, li in enumerate(images):
        score("otsu", otsu_binarize(li.image)[0].astype(int), s)
        score("intensity", cluster(feature_field(li.image, None, 0), 2, seed=0).labels, s)
    for name in args.filters:
        pair = builtin_filter_pair(name)
        for s, li in enumerate(images):
            base = feature_field(li.image, pair, args.levels)
            for w in args.weights:
                ff = apply_weighting(base, WeightingConfig(w))
                score(f"{name} w={w:g}", cluster(ff, 2, seed=0).labels, s)

    methods = list(dict.fromkeys(r["method"] for r in rows))
    print(f"{'method':<20} {'median':>8} {'mean':>8}")
    for m in methods:
        rates = [r["rate"] for r in rows if r["method"] == m]
        print(f"{m:<20} {np.median(rates):8.4f} {np.mean(rates):8.4f}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["method", "seed", "rate"])
            w.writeheader()
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
