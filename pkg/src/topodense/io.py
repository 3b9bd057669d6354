"""File formats: point clouds, barcodes, datasets, experiment configs, checkpoints.

CSV dialect everywhere: comma separator, header row, ``.`` decimal point and
LF line endings. Floats are written with ``repr`` so values round-trip.

Experiment config (INI)::

    [model]
    hidden_layers = 32, 32     ; comma separated widths
    latent_dim = 8
    leaky_slope = 0.1

    [train]
    lr0 = 0.1
    momentum = 0.9
    epochs = 200
    weight_decay_phi = 0.001
    weight_decay_gamma = 0.001
    lambda_topo = 0.05         ; or "auto" (the default)
    beta = 1.0
    seed = 0
    loss_variant = two-sided   ; or one-sided
    batches_per_epoch =        ; empty: ceil(m / (n b))

    [sampler]
    b = 4
    n = 3
    seed = 0
    class_policy = auto        ; auto | with-replacement | without-replacement
    distinct_classes = false

    [data]
    source = blobs             ; blobs | csv
    num_classes = 3            ; blobs only
    per_class = 50
    dim = 10
    sigma = 1.0
    center_scale = 3.0
    seed = 0
    train_size = 50
    train_csv =                ; csv only
    test_csv =

Only ``[model]`` keys ``input_dim``/``num_classes`` are inferred from the data.

Checkpoint: a JSON document whose first key is the format tag::

    {"format": "topodense-checkpoint", "version": 1,
     "model_config": {...}, "train_config": {...},
     "tensors": {"phi.0.weight": {"shape": [10, 32], "data": [...]}, ...}}
"""
from __future__ import annotations

import configparser
import csv
import dataclasses
import json
import os
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .persistence import Barcode, as_point_cloud
from .sampler import LabeledDataset, SamplerConfig
from .trainer import ModelConfig, ModelState, TrainConfig

CHECKPOINT_FORMAT = "topodense-checkpoint"
CHECKPOINT_VERSION = 1


class ConfigError(ValueError):
    """Raised with every schema violation listed as ``section.key: message``."""

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("invalid config:\n  " + "\n  ".join(self.problems))


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_point_cloud(path) -> np.ndarray:
    """Read points from CSV (one point per row) or JSON (array of arrays).

    A CSV header row is detected when its first field is not numeric.
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith("["):
        return as_point_cloud(json.loads(text))
    rows = [r for r in csv.reader(text.splitlines()) if r and any(f.strip() for f in r)]
    if rows:
        try:
            float(rows[0][0])
        except ValueError:
            rows = rows[1:]
    try:
        points = [[float(f) for f in r] for r in rows]
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric coordinate ({exc})") from None
    return as_point_cloud(points)


def write_barcode_csv(path, bc: Barcode) -> None:
    write_csv(path, ["i", "j", "death"], ((e.i, e.j, e.length) for e in bc.edges))


def read_dataset_csv(path, num_classes: int | None = None) -> LabeledDataset:
    """CSV with feature columns followed by a final ``label`` column."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = rows[0], [r for r in rows[1:] if r]
    if not header or header[-1] != "label":
        raise ValueError(f"{path}: last column must be named 'label'")
    try:
        feats = np.array([[float(v) for v in r[:-1]] for r in body], dtype=np.float64)
        labels = np.array([int(r[-1]) for r in body], dtype=np.int64)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    return LabeledDataset(feats.reshape(len(body), len(header) - 1), labels, num_classes)


def write_dataset_csv(path, dataset: LabeledDataset) -> None:
    d = dataset.features.shape[1]
    header = [f"x{k}" for k in range(d)] + ["label"]
    write_csv(path, header, ([*f, int(y)] for f, y in zip(dataset.features, dataset.labels)))


# config ---------------------------------------------------------------------

_SCHEMA: dict[str, dict[str, tuple[type, Any]]] = {
    "model": {
        "hidden_layers": (tuple, (32,)),
        "latent_dim": (int, 8),
        "leaky_slope": (float, 0.1),
    },
    "train": {
        "lr0": (float, 0.1),
        "momentum": (float, 0.9),
        "epochs": (int, 200),
        "weight_decay_phi": (float, 1e-3),
        "weight_decay_gamma": (float, 1e-3),
        "lambda_topo": (float, None),
        "beta": (float, 1.0),
        "seed": (int, 0),
        "loss_variant": (str, "two-sided"),
        "batches_per_epoch": (int, None),
        "eval_subbatches": (int, 64),
    },
    "sampler": {
        "b": (int, 16),
        "n": (int, 8),
        "seed": (int, 0),
        "class_policy": (str, "auto"),
        "distinct_classes": (bool, False),
    },
    "data": {
        "source": (str, "blobs"),
        "num_classes": (int, 3),
        "per_class": (int, 50),
        "dim": (int, 10),
        "sigma": (float, 1.0),
        "center_scale": (float, 3.0),
        "seed": (int, 0),
        "train_size": (int, 50),
        "train_csv": (str, None),
        "test_csv": (str, None),
    },
}


@dataclasses.dataclass
class ExperimentConfig:
    model: dict[str, Any]
    train: TrainConfig
    data: dict[str, Any]


def _parse_value(kind: type, raw: str, section: str, key: str):
    raw = raw.strip()
    if raw == "":
        return None
    if section == "train" and key == "lambda_topo" and raw.lower() == "auto":
        return None
    if kind is tuple:
        return tuple(int(v) for v in raw.split(",") if v.strip())
    if kind is bool:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    return kind(raw)


def parse_config(text: str, base_dir: str | os.PathLike = ".") -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"<file>: {exc}"]) from None
    problems = []
    values: dict[str, dict[str, Any]] = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            problems.append(f"{section}: unknown section")
    for section, fields in _SCHEMA.items():
        values[section] = {k: default for k, (_, default) in fields.items()}
        if not cp.has_section(section):
            continue
        for key, raw in cp.items(section):
            if key not in fields:
                problems.append(f"{section}.{key}: unknown key")
                continue
            try:
                v = _parse_value(fields[key][0], raw, section, key)
            except ValueError as exc:
                problems.append(f"{section}.{key}: {exc}")
                continue
            if v is None and key not in ("batches_per_epoch", "lambda_topo", "train_csv", "test_csv"):
                problems.append(f"{section}.{key}: value required")
                continue
            values[section][key] = v

    data = values["data"]
    if data["source"] not in ("blobs", "csv"):
        problems.append(f"data.source: must be 'blobs' or 'csv', got {data['source']!r}")
    if data["source"] == "csv":
        for key in ("train_csv", "test_csv"):
            if not data[key]:
                problems.append(f"data.{key}: required when data.source = csv")
            else:
                data[key] = str(Path(base_dir) / data[key])

    sampler = train = None
    try:
        sampler = SamplerConfig(**values["sampler"])
    except ValueError as exc:
        problems.append(f"sampler: {exc}")
    if sampler is not None:
        try:
            train = TrainConfig(sampler=sampler, **values["train"])
        except ValueError as exc:
            problems.append(f"train: {exc}")
    m = values["model"]
    if m["latent_dim"] is not None and m["latent_dim"] < 2:
        problems.append(f"model.latent_dim: must be >= 2, got {m['latent_dim']}")
    if any(w < 1 for w in m["hidden_layers"]):
        problems.append(f"model.hidden_layers: widths must be >= 1, got {m['hidden_layers']}")
    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(model=m, train=train, data=data)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), base_dir=path.parent)


# checkpoints ----------------------------------------------------------------

def _train_config_dict(cfg: TrainConfig | None):
    return None if cfg is None else dataclasses.asdict(cfg)


def save_checkpoint(path, model: ModelState, train_config: TrainConfig | None = None) -> None:
    doc = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "model_config": dataclasses.asdict(model.config),
        "train_config": _train_config_dict(train_config),
        "tensors": {
            name: {"shape": list(arr.shape), "data": arr.ravel().tolist()}
            for name, arr in sorted(model.params.items())
        },
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_checkpoint(path) -> tuple[ModelState, dict | None]:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path}: not a {CHECKPOINT_FORMAT} file")
    if doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {doc.get('version')}")
    cfg = ModelConfig(**doc["model_config"])
    params = {
        name: np.asarray(t["data"], dtype=np.float64).reshape(t["shape"])
        for name, t in doc["tensors"].items()
    }
    buffers = {k: np.zeros_like(v) for k, v in params.items()}
    return ModelState(cfg, params, buffers), doc.get("train_config")
