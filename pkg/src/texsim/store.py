"""Feature files and the on-disk feature cache."""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np

from .curvelet import CurveletParams
from .errors import ConfigurationError
from .features import FeatureVector, params_digest

FEATURE_VERSION = 1
CACHE_ENV = "TEXSIM_CACHE"


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def feature_record(fv: FeatureVector, params: CurveletParams, image_path="", content_digest="") -> dict:
    wedges = [
        {
            "scale": j,
            "orientation": k,
            "L": int(block.size),
            "effective_rank": float(q),
            "effective_values": [float(x) for x in block],
        }
        for j, k, q, block in fv.blocks()
    ]
    return {
        "version": FEATURE_VERSION,
        "image": {"path": str(image_path), "height": params.height, "width": params.width},
        "params": {"scales": params.scales, "orientations_coarse": params.orientations_coarse},
        "params_digest": fv.params_digest,
        "content_digest": content_digest,
        "wedges": wedges,
    }


def record_to_vector(record: dict) -> FeatureVector:
    if record.get("version") != FEATURE_VERSION:
        raise ConfigurationError(f"unsupported feature file version {record.get('version')!r}")
    img, prm = record["image"], record["params"]
    params = CurveletParams(img["height"], img["width"], prm["scales"], prm["orientations_coarse"])
    layout, ranks, blocks = [], [], []
    for w in record["wedges"]:
        values = np.asarray(w["effective_values"], dtype=float)
        if values.size != w["L"]:
            raise ConfigurationError(f"wedge ({w['scale']}, {w['orientation']}) has wrong length")
        layout.append((w["scale"], w["orientation"], w["L"]))
        ranks.append(w["effective_rank"])
        blocks.append(values)
    return FeatureVector(layout, np.concatenate(blocks), params_digest(params), ranks)


def write_features(path, record: dict) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(record, indent=1) + "\n")
    os.replace(tmp, path)


def read_features(path) -> FeatureVector:
    try:
        record = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read feature file {path}: {exc}") from exc
    return record_to_vector(record)


class FeatureCache:
    """Directory of feature files keyed by image content and transform parameters."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path_for(self, content_digest: str, pdigest: str) -> Path:
        return self.root / f"{content_digest[:32]}_{pdigest}.json"

    def get(self, content_digest: str, pdigest: str) -> FeatureVector | None:
        path = self.path_for(content_digest, pdigest)
        if not path.exists():
            return None
        try:
            return read_features(path)
        except (ConfigurationError, KeyError, TypeError, ValueError):
            return None

    def put(self, record: dict) -> Path:
        path = self.path_for(record["content_digest"], record["params_digest"])
        write_features(path, record)
        return path


def default_cache_dir(manifest_path=None) -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    if manifest_path is not None:
        return Path(manifest_path).resolve().parent / ".features"
    return Path.home() / ".cache" / "texsim"
