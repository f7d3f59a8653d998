"""Command-line interface: dataset preparation, features, similarity, benchmarks."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np
from PIL import Image

from . import imgprep
from .curvelet import forward, make_params
from .errors import (
    ConfigurationError,
    DimensionError,
    IncompatibleError,
    NumericError,
    ParameterError,
    TexsimError,
)
from .features import FeatureVector, extract_features, params_digest
from .retrieval import RetrievalReport, evaluate
from .similarity import check_compatible, czekanowski, czekanowski_matrix, mse_matrix
from .store import FeatureCache, default_cache_dir, feature_record, file_digest

log = logging.getLogger("texsim")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
MEASURES = ("czekanowski", "mse")
REPORT_VERSION = 1


class UsageError(TexsimError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    manifest: Optional[Path] = None
    scales: Optional[int] = None
    angles: Optional[int] = None
    measure: str = "czekanowski"
    out: Optional[Path] = None
    jobs: int = 1
    cache: Optional[Path] = None

    def __post_init__(self):
        if self.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        if self.measure not in MEASURES:
            raise UsageError(f"unknown measure {self.measure!r}")


# ---------------------------------------------------------------------------
# feature extraction with caching


def _extract_record(path: str, scales, angles, digest: str) -> dict:
    image = imgprep.load_image(path)
    params = make_params(image.shape[0], image.shape[1], scales, angles)
    fv = extract_features(forward(image, params))
    return feature_record(fv, params, path, digest)


@dataclass
class FeatureRun:
    vectors: List[Optional[FeatureVector]]
    extracted: int
    cached: int
    failures: dict


def manifest_paths(manifest_path: Path, manifest: dict) -> List[Path]:
    base = manifest_path.resolve().parent
    return [base / e["file"] for e in manifest["entries"]]


def compute_features(cfg: RunConfig) -> FeatureRun:
    """Features for every manifest entry, reusing cached files."""
    manifest = imgprep.read_manifest(cfg.manifest)
    paths = manifest_paths(cfg.manifest, manifest)
    cache = FeatureCache(cfg.cache or default_cache_dir(cfg.manifest))

    vectors: List[Optional[FeatureVector]] = [None] * len(paths)
    failures = {}
    todo = []
    for i, path in enumerate(paths):
        try:
            digest = file_digest(path)
            with Image.open(path) as im:
                width, height = im.size
            pdigest = params_digest(make_params(height, width, cfg.scales, cfg.angles))
        except (OSError, ValueError) as exc:
            failures[str(path)] = str(exc)
            continue
        hit = cache.get(digest, pdigest)
        if hit is not None:
            vectors[i] = hit
        else:
            todo.append((i, str(path), digest))
    cached = len(paths) - len(todo) - len(failures)

    def finish(i, record):
        cache.put(record)
        vectors[i] = cache.get(record["content_digest"], record["params_digest"])

    if cfg.jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = [
                (i, path, pool.submit(_extract_record, path, cfg.scales, cfg.angles, digest))
                for i, path, digest in todo
            ]
            for i, path, fut in futures:
                try:
                    finish(i, fut.result())
                except (OSError, TexsimError, ValueError) as exc:
                    failures[path] = str(exc)
    else:
        for i, path, digest in todo:
            try:
                finish(i, _extract_record(path, cfg.scales, cfg.angles, digest))
            except (OSError, TexsimError, ValueError) as exc:
                failures[path] = str(exc)
    extracted = len(todo) - sum(1 for _, p, _ in todo if p in failures)
    for path, msg in failures.items():
        log.error("%s: %s", path, msg)
    log.info("features: %d extracted, %d cached, %d failed", extracted, cached, len(failures))
    return FeatureRun(vectors, extracted, cached, failures)


# ---------------------------------------------------------------------------
# benchmark


def benchmark(cfg: RunConfig):
    """Run the retrieval experiment.

    Returns the ``report.json`` dictionary and the full
    :class:`RetrievalReport`; both files are written when ``cfg.out`` is set.
    """
    manifest = imgprep.read_manifest(cfg.manifest)
    labels = [e["class"] for e in manifest["entries"]]
    params_info = None
    if cfg.measure == "mse":
        images = [imgprep.load_image(p) for p in manifest_paths(cfg.manifest, manifest)]
        if len({im.shape for im in images}) != 1:
            raise IncompatibleError("MSE needs equally sized images")
        scores, higher = mse_matrix(np.stack(images)), False
    else:
        run = compute_features(cfg)
        if run.failures:
            raise ConfigurationError(f"{len(run.failures)} images could not be processed")
        first = run.vectors[0]
        for fv in run.vectors[1:]:
            check_compatible(first, fv)
        scores, higher = czekanowski_matrix(np.stack([fv.values for fv in run.vectors])), True
        with Image.open(manifest_paths(cfg.manifest, manifest)[0]) as im:
            width, height = im.size
        resolved = make_params(height, width, cfg.scales, cfg.angles)
        params_info = {
            "scales": resolved.scales,
            "orientations_coarse": resolved.orientations_coarse,
            "digest": first.params_digest,
        }

    report = evaluate(scores, labels, higher)
    result = {
        "version": REPORT_VERSION,
        "dataset": manifest.get("dataset", "custom"),
        "measure": cfg.measure,
        "classes": len(set(labels)),
        "samples_per_class": len(labels) // len(set(labels)),
        "params": params_info,
    }
    result.update(report.to_dict())
    if cfg.out is not None:
        write_report(cfg.out, result, report)
    return result, report


def write_report(out_dir: Path, result: dict, report: RetrievalReport) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(json.dumps(result, indent=2) + "\n")
    write_roc(out_dir / "roc.csv", report.roc_points)


def write_roc(path: Path, points: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fpr", "tpr"])
        for fpr, tpr in points:
            writer.writerow([repr(float(fpr)), repr(float(tpr))])


def _summary(result: dict) -> str:
    return (
        f"{result['measure']}: C={result['classes']} S={result['samples_per_class']}  "
        f"P@1={result['p_at_1']:.4f}  MRR={result['mrr']:.4f}  "
        f"MAP={result['map']:.4f}  AUC={result['auc']:.4f}"
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_prepare(args) -> int:
    manifest, failures = imgprep.prepare_dataset(args.source, args.kind, args.out)
    for path, msg in failures.items():
        print(f"texsim: {path}: {msg}", file=sys.stderr)
    print(f"{manifest['classes']} classes x {manifest['samples_per_class']} samples -> {args.out}")
    return EXIT_DATA if failures else EXIT_OK


def _config(args) -> RunConfig:
    return RunConfig(
        manifest=Path(args.manifest) if getattr(args, "manifest", None) else None,
        scales=args.scales,
        angles=args.angles,
        measure=getattr(args, "measure", "czekanowski"),
        out=Path(args.out) if getattr(args, "out", None) else None,
        jobs=getattr(args, "jobs", 1),
        cache=Path(args.cache) if getattr(args, "cache", None) else None,
    )


def cmd_features(args) -> int:
    run = compute_features(_config(args))
    for path, msg in run.failures.items():
        print(f"texsim: {path}: {msg}", file=sys.stderr)
    print(f"extracted {run.extracted}, cached {run.cached}, failed {len(run.failures)}")
    return EXIT_DATA if run.failures else EXIT_OK


def cmd_sim(args) -> int:
    a = imgprep.load_image(args.image_a)
    b = imgprep.load_image(args.image_b)
    if a.shape != b.shape:
        raise IncompatibleError(f"image sizes differ: {a.shape} vs {b.shape}")
    params = make_params(a.shape[0], a.shape[1], args.scales, args.angles)
    score = czekanowski(extract_features(forward(a, params)), extract_features(forward(b, params)))
    print(f"{score.value:.6f}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    result, _ = benchmark(_config(args))
    print(_summary(result))
    return EXIT_OK


def cmd_roc(args) -> int:
    cfg = _config(args)
    out, cfg.out = cfg.out, None
    result, report = benchmark(cfg)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_roc(out / "roc.csv", report.roc_points)
    print(f"AUC={result['auc']:.4f}  ({len(report.roc_points)} ROC points)")
    return EXIT_OK


def cmd_wedges(args) -> int:
    image = imgprep.load_image(args.image)
    params = make_params(image.shape[0], image.shape[1], args.scales, args.angles)
    decomposition = forward(image, params)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["scale", "orientation", "rows", "cols", "energy"])
        for (j, k), coeffs in decomposition.wedges.items():
            energy = float(np.sum(np.abs(coeffs) ** 2))
            writer.writerow([j, k, coeffs.shape[0], coeffs.shape[1], repr(energy)])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="texsim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def transform_flags(p):
        p.add_argument("--scales", type=int, default=None, help="number of curvelet scales")
        p.add_argument("--angles", type=int, default=None, help="orientations at the second scale")

    def run_flags(p):
        p.add_argument("manifest", help="manifest.json written by 'prepare'")
        transform_flags(p)
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("--cache", default=None, help="feature cache directory")

    p = sub.add_parser("prepare", help="cut source images into patches")
    p.add_argument("source", help="directory of source images")
    p.add_argument("--kind", choices=sorted(imgprep.PREPARERS), required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("features", help="extract and cache feature vectors")
    run_flags(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("sim", help="similarity of two images")
    p.add_argument("image_a")
    p.add_argument("image_b")
    transform_flags(p)
    p.set_defaults(func=cmd_sim)

    for name, func, text in (
        ("benchmark", cmd_benchmark, "leave-one-out retrieval benchmark"),
        ("roc", cmd_roc, "ROC curve of the retrieval benchmark"),
    ):
        p = sub.add_parser(name, help=text)
        run_flags(p)
        p.add_argument("--measure", choices=MEASURES, default="czekanowski")
        p.add_argument("--out", default=None, help="output directory for report.json/roc.csv")
        p.set_defaults(func=func)

    p = sub.add_parser("wedges", help="per-wedge energy table (CSV)")
    p.add_argument("image")
    transform_flags(p)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_wedges)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"texsim: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"texsim: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigurationError, DimensionError, IncompatibleError, ParameterError, OSError) as exc:
        print(f"texsim: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
