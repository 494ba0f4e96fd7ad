"""``waveseg`` command-line front end.

Every command validates its flags, computes everything in memory and only
then writes its outputs, so a failed run leaves no files behind. Errors are
reported on stderr as one JSON object ``{"error": category, "exit_code": n,
"message": ...}`` and the process exits with the category's code.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .acwe import AcweParams, acwe_w, init_levelset
from .clustering import fcm_w, kmeans_w
from .errors import ConfigError, IoError, WavesegError
from .filterbank import BUILTIN_NAMES, resolve_filter
from .imageio import (
    band_visualization,
    encode_mask,
    encode_pgm,
    read_image,
    read_labels,
    remove_quietly,
)
from .metrics import misclassification
from .phantom import PhantomSpec, make_phantom
from .wavelets import (
    FEATURE_MAGIC,
    LEVELSET_MAGIC,
    PYRAMID_MAGIC,
    WeightingConfig,
    apply_weighting,
    encode_container,
    feature_field,
    wavedec2,
)

log = logging.getLogger("waveseg")

THREADS_ENV = "WAVESEG_THREADS"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# ---------------------------------------------------------------------------
# flag helpers


def _size(text: str) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError("size must be positive")
    return w, h


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def resolve_threads(flag: int | None) -> int:
    if flag is not None:
        n = flag
    else:
        env = os.environ.get(THREADS_ENV)
        if env is None or env.strip() == "":
            return 1
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV}={env!r} is not an integer") from None
    if n < 1:
        raise ConfigError("thread count must be at least 1")
    return n


def _common(p):
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default: ${THREADS_ENV} or 1)")
    p.add_argument("--report", type=Path, default=None, help="JSON run report")
    p.add_argument("--no-timing", action="store_true",
                   help="write wall_time_s as null so reports are byte-reproducible")


def _features_flags(p):
    p.add_argument("--filter", default="canonical",
                   help=f"one of {', '.join(BUILTIN_NAMES)} or a JSON filter file")
    p.add_argument("--levels", type=_nonneg_int, default=3,
                   help="decomposition levels; 0 uses raw intensity")
    p.add_argument("--w", type=_positive_float, default=1.0, help="low-frequency weight")
    p.add_argument("--mode", choices=("power", "scale"), default="power")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="waveseg", description="Wavelet-feature image segmentation.")
    parser.add_argument("--version", action="version", version=f"waveseg {__version__}")
    parser.add_argument("--log-level", default="WARNING",
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("phantom", help="generate a synthetic image with ground truth")
    p.add_argument("output", type=Path)
    p.add_argument("--kind", choices=("minefield", "disk", "composite"), default="minefield")
    p.add_argument("--size", type=_size, default=(64, 64), metavar="WxH")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mines", type=_nonneg_int, default=6)
    p.add_argument("--mine-radius", type=_positive_float, default=5.0)
    p.add_argument("--truth", type=Path, default=None)
    _common(p)

    p = sub.add_parser("decompose", help="wavelet pyramid, band images and features")
    p.add_argument("input", type=Path)
    p.add_argument("outdir", type=Path, help="directory for per-band PGM images")
    p.add_argument("--filter", default="canonical")
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--pyramid", type=Path, default=None, help="binary pyramid container")
    p.add_argument("--features", type=Path, default=None, help="binary feature container")
    _common(p)

    p = sub.add_parser("cluster", help="K-means or fuzzy C-means segmentation")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--algo", choices=("kmeans", "fcm"), default="kmeans")
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--q", type=float, default=2.0, help="FCM fuzzifier")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=_nonneg_int, default=300)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--trace", type=Path, default=None, help="CSV objective trace")
    _features_flags(p)
    _common(p)

    p = sub.add_parser("acwe", help="two-phase active contour without edges")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--mu", type=float, default=None, help="length weight (default: automatic)")
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=None, help="time step (default: automatic)")
    p.add_argument("--lambda1", type=float, default=1.0)
    p.add_argument("--lambda2", type=float, default=1.0)
    p.add_argument("--init", choices=("circle", "checkerboard"), default="circle")
    p.add_argument("--max-iter", type=_nonneg_int, default=1000)
    p.add_argument("--stop-tol", type=float, default=1e-4)
    p.add_argument("--phi", type=Path, default=None, help="binary level-set container")
    p.add_argument("--trace", type=Path, default=None, help="CSV energy trace")
    _features_flags(p)
    _common(p)

    p = sub.add_parser("evaluate", help="score a label image against ground truth")
    p.add_argument("prediction", type=Path)
    p.add_argument("truth", type=Path)
    p.add_argument("--classes", type=int, default=2)
    _common(p)
    return parser


# ---------------------------------------------------------------------------
# pipeline pieces


def pad_to_multiple(img: np.ndarray, levels: int) -> np.ndarray:
    """Symmetric padding at the bottom/right up to a multiple of 2^levels."""
    step = 1 << levels
    h, w = img.shape
    ph, pw = (-h) % step, (-w) % step
    if ph == 0 and pw == 0:
        return img
    return np.pad(img, ((0, ph), (0, pw)), mode="symmetric")


def _features(img, args, threads):
    pair = resolve_filter(args.filter)
    padded = pad_to_multiple(img, args.levels)
    ff = feature_field(padded, pair, args.levels, threads=threads)
    ff = apply_weighting(ff, WeightingConfig(args.w, args.mode))
    return pair, ff


def _filter_info(pair):
    v = pair.validation
    return {
        "name": pair.name,
        "h0": pair.h0.tolist(),
        "f0": pair.f0.tolist(),
        "pr_max_error": v.max_error if v else None,
        "pr_passed": v.passed if v else None,
    }


def _trace_csv(values) -> bytes:
    lines = ["iter,objective"] + [f"{i},{v!r}" for i, v in values]
    return ("\n".join(lines) + "\n").encode("ascii")


def _config_echo(args, threads) -> dict:
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if isinstance(v, Path):
            v = str(v)
        elif isinstance(v, tuple):
            v = list(v)
        cfg[k] = v
    cfg["threads"] = threads
    return cfg


def cmd_phantom(args, threads):
    w, h = args.size
    spec = PhantomSpec(kind=args.kind, width=w, height=h, noise_sigma=args.noise,
                       seed=args.seed, mines=args.mines, mine_radius=args.mine_radius)
    li = make_phantom(spec)
    out = {args.output: encode_pgm(np.rint(li.image * 255), 255)}
    if args.truth is not None:
        out[args.truth] = encode_mask(li.truth, len(li.regions))
    result = {
        "final_value": None,
        "iterations": None,
        "regions": {str(k): v for k, v in li.regions.items()},
        "spec": li.spec,
    }
    return out, result


def cmd_decompose(args, threads):
    if args.levels < 1:
        raise ConfigError("decompose needs at least one level")
    img = read_image(args.input)
    pair = resolve_filter(args.filter)
    padded = pad_to_multiple(img, args.levels)
    pyr = wavedec2(padded, pair, args.levels)
    out = {}
    bands = {f"LL{args.levels}": pyr.approx}
    for k, trio in enumerate(pyr.details, start=1):
        for name, band in zip(("HL", "LH", "HH"), trio):
            bands[f"{name}{k}"] = band
    for name, band in bands.items():
        out[args.outdir / f"{name}.pgm"] = encode_pgm(np.rint(band_visualization(band) * 255))
    out[args.outdir / "mosaic.pgm"] = encode_pgm(np.rint(band_visualization(pyr.mosaic()) * 255))
    if args.pyramid is not None:
        out[args.pyramid] = encode_container(PYRAMID_MAGIC, pyr.mosaic(), args.levels)
    if args.features is not None:
        ff = feature_field(padded, pair, args.levels, threads=threads)
        out[args.features] = encode_container(FEATURE_MAGIC, ff.vectors, args.levels)
    result = {
        "final_value": None,
        "iterations": None,
        "filter": _filter_info(pair),
        "input_shape": list(img.shape),
        "padded_shape": list(padded.shape),
        "coefficient_count": pyr.coefficient_count(),
        "bands": sorted(bands),
    }
    return out, result


def cmd_cluster(args, threads):
    if args.classes < 1:
        raise ConfigError("--classes must be at least 1")
    if args.algo == "fcm" and not args.q > 1:
        raise ConfigError("--q must exceed 1")
    img = read_image(args.input)
    pair, ff = _features(img, args, threads)
    if args.algo == "kmeans":
        res = kmeans_w(ff, args.classes, max_iter=args.max_iter, tol=args.tol, seed=args.seed)
    else:
        res = fcm_w(ff, args.classes, q=args.q, max_iter=args.max_iter, tol=args.tol,
                    seed=args.seed)
    h, w = img.shape
    labels = res.labels[:h, :w]
    out = {args.output: encode_mask(labels, args.classes)}
    if args.trace is not None:
        out[args.trace] = _trace_csv(enumerate(res.objective_trace, start=1))
    result = {
        "final_value": res.objective_trace[-1] if res.objective_trace else None,
        "iterations": res.iterations,
        "converged": res.converged,
        "centroids": res.centroids.tolist(),
        "class_counts": np.bincount(labels.ravel(), minlength=args.classes).tolist(),
        "feature_dim": ff.dim,
        "filter": _filter_info(pair),
    }
    return out, result


def cmd_acwe(args, threads):
    params = AcweParams(lambda1=args.lambda1, lambda2=args.lambda2, mu=args.mu, eps=args.eps,
                        dt=args.dt, max_iter=args.max_iter, stop_tol=args.stop_tol)
    img = read_image(args.input)
    pair, ff = _features(img, args, threads)
    phi0 = init_levelset(ff.width, ff.height, args.init)
    res = acwe_w(ff, phi0, params)
    h, w = img.shape
    mask = res.mask[:h, :w]
    out = {args.output: encode_mask(mask, 2)}
    if args.phi is not None:
        out[args.phi] = encode_container(LEVELSET_MAGIC, res.phi[:h, :w], 0)
    if args.trace is not None:
        out[args.trace] = _trace_csv(enumerate(res.energy_trace))
    result = {
        "final_value": res.energy_trace[-1],
        "iterations": res.iterations,
        "converged": res.converged,
        "mean_in": res.mean_in.tolist(),
        "mean_out": res.mean_out.tolist(),
        "foreground_fraction": float(mask.mean()),
        "mu": res.params["mu"],
        "dt": res.params["dt"],
        "feature_dim": ff.dim,
        "filter": _filter_info(pair),
    }
    return out, result


def cmd_evaluate(args, threads):
    if args.classes < 1:
        raise ConfigError("--classes must be at least 1")
    pred = read_labels(args.prediction, args.classes)
    truth = read_labels(args.truth, args.classes)
    rep = misclassification(pred, truth, args.classes)
    result = {"final_value": rep.misclassification_rate, "iterations": None}
    result.update(rep.to_json())
    return {}, result


COMMANDS = {
    "phantom": cmd_phantom,
    "decompose": cmd_decompose,
    "cluster": cmd_cluster,
    "acwe": cmd_acwe,
    "evaluate": cmd_evaluate,
}


def _write_all(outputs: dict) -> None:
    written = []
    try:
        for path, payload in outputs.items():
            path = Path(path)
            if path.parent and not path.parent.exists():
                path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "wb") as fh:
                written.append(path)
                fh.write(payload)
    except OSError as exc:
        remove_quietly(written)
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    threads = resolve_threads(args.threads)
    start = time.perf_counter()
    outputs, result = COMMANDS[args.command](args, threads)
    report = {
        "command": args.command,
        "version": __version__,
        "config": _config_echo(args, threads),
        "result": result,
        "wall_time_s": None if args.no_timing else time.perf_counter() - start,
    }
    text = json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if args.report is not None:
        outputs[args.report] = text.encode("utf-8")
    elif args.command == "evaluate":
        sys.stdout.write(text)
    _write_all(outputs)
    return 0


def main(argv=None) -> int:
    try:
        return run(argv)
    except WavesegError as exc:
        err = {"error": exc.category, "exit_code": exc.exit_code, "message": str(exc)}
        sys.stderr.write(json.dumps(err) + "\n")
        return exc.exit_code
    except MemoryError as exc:
        sys.stderr.write(json.dumps({"error": "memory", "exit_code": 9,
                                     "message": str(exc)}) + "\n")
        return 9


if __name__ == "__main__":
    sys.exit(main())
