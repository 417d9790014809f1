"""Model file format and parallel-corpus reading.

Model files are a small self-contained container:

    magic "NMT1" | u32 format version | u64 header length | header JSON |
    raw float64 tensor bytes in manifest order

The JSON header carries the config, both vocabularies, and the tensor
manifest, so a load can audit every shape before touching the payload.
Save -> load -> save is byte-identical.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..errors import NormlexError
from .config import ModelConfig
from .model import TrainingExample, TranslationModel, expected_param_shapes
from .vocab import CharVocab

MODEL_MAGIC = b"NMT1"
MODEL_FORMAT_VERSION = 1


class CorruptFile(NormlexError):
    """Model file is truncated or not a model file at all."""


class IncompatibleVersion(NormlexError):
    """Model file version or declared shapes do not match this code."""


class ParallelCorpusError(NormlexError):
    """Parallel corpus TSV could not be parsed."""


def save_model(model: TranslationModel, path: str | Path) -> None:
    names = list(expected_param_shapes(
        model.config, len(model.source_vocab), len(model.target_vocab)
    ))
    header = {
        "format": "normlex-nmt",
        "version": MODEL_FORMAT_VERSION,
        "config": asdict(model.config),
        "source_chars": list(model.source_vocab.chars),
        "target_chars": list(model.target_vocab.chars),
        "tensors": [[name, list(model.params[name].shape)] for name in names],
    }
    header_bytes = json.dumps(
        header, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", MODEL_FORMAT_VERSION))
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for name in names:
            tensor = model.params[name]
            if tensor.dtype != np.float64:
                raise ValueError(f"tensor {name} is not float64")
            fh.write(np.ascontiguousarray(tensor).tobytes())


def load_model(path: str | Path) -> TranslationModel:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CorruptFile(f"cannot read model file {path}: {exc}") from exc
    if len(data) < 16 or data[:4] != MODEL_MAGIC:
        raise CorruptFile(f"{path} is not a model file")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != MODEL_FORMAT_VERSION:
        raise IncompatibleVersion(f"model format version {version} is not supported")
    (header_len,) = struct.unpack_from("<Q", data, 8)
    header_end = 16 + header_len
    if header_end > len(data):
        raise CorruptFile(f"truncated model file {path}")
    try:
        header = json.loads(data[16:header_end].decode("utf-8"))
        config = ModelConfig.from_dict(header["config"])
        source_vocab = CharVocab.from_chars(header["source_chars"])
        target_vocab = CharVocab.from_chars(header["target_chars"])
        manifest = [(name, tuple(shape)) for name, shape in header["tensors"]]
    except (KeyError, ValueError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptFile(f"corrupt model header in {path}: {exc}") from exc

    expected = expected_param_shapes(config, len(source_vocab), len(target_vocab))
    if dict(manifest) != expected:
        raise IncompatibleVersion(
            f"tensor manifest of {path} does not match its declared config"
        )

    params: dict[str, np.ndarray] = {}
    pos = header_end
    for name, shape in manifest:
        nbytes = int(np.prod(shape)) * 8
        chunk = data[pos : pos + nbytes]
        if len(chunk) != nbytes:
            raise CorruptFile(f"truncated model file {path} (tensor {name})")
        params[name] = np.frombuffer(chunk, dtype=np.float64).reshape(shape).copy()
        pos += nbytes
    if pos != len(data):
        raise CorruptFile(f"trailing bytes in model file {path}")
    return TranslationModel(
        config=config, source_vocab=source_vocab, target_vocab=target_vocab, params=params
    )


def read_parallel_corpus(path: str | Path) -> list[TrainingExample]:
    """Read `source<TAB>target` pairs; repeated sources aggregate targets.

    Lines starting with ``#`` and blank lines are skipped; exact duplicate
    pairs are kept once.  Example order follows first appearance.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParallelCorpusError(f"cannot read corpus {path}: {exc}") from exc
    targets_by_source: dict[str, list[str]] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParallelCorpusError(f"{path}:{line_no}: expected 2 fields, got {len(fields)}")
        source, target = fields
        if not source or not target:
            raise ParallelCorpusError(f"{path}:{line_no}: empty source or target")
        bucket = targets_by_source.setdefault(source, [])
        if target not in bucket:
            bucket.append(target)
    return [
        TrainingExample(source=source, targets=tuple(targets))
        for source, targets in targets_by_source.items()
    ]
