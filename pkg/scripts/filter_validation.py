"""Perfect-reconstruction report for the built-in filter pairs.

    python3 scripts/filter_validation.py --size 64 --levels 3
"""
import argparse
import logging

import numpy as np

from waveseg.filterbank import BUILTIN_NAMES, builtin_filter_pair, fit_gain_delay
from waveseg.wavelets import wavedec2, waverec2

p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
p.add_argument("--size", type=int, default=64)
p.add_argument("--levels", type=int, default=3)
p.add_argument("--seed", type=int, default=1)
args = p.parse_args()
logging.basicConfig(level=logging.ERROR)

x = np.random.default_rng(args.seed).random((args.size, args.size))
print(f"{'pair':<12} {'1-D error':>10} {'2-D error':>10} {'gain':>8} {'sum h0':>8} {'alt sum h0':>10}")
for name in BUILTIN_NAMES:
    pair = builtin_filter_pair(name)
    gain, _, err2 = fit_gain_delay(x, waverec2(wavedec2(x, pair, args.levels), pair))
    alt = float((pair.h0 * (-1.0) ** np.arange(len(pair.h0))).sum())
    print(f"{name:<12} {pair.validation.max_error:10.3g} {err2:10.3g} {gain:8.4f} "
          f"{pair.h0.sum():8.4f} {alt:10.4f}")
