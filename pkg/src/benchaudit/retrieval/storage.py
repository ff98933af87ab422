"""Binary on-disk index formats (little-endian throughout).

Dense index ("BBDI" v1):
    magic 4s | u32 version | u32 dimension | u64 count
    count * dimension float32 row-major
    id table: count entries of (u32 byte length | UTF-8 bytes)

Lexical index ("BBLI" v1):
    magic 4s | u32 version | f64 k1 | f64 b | u64 doc count
    doc count * u32 token lengths
    id table as above
    u64 term count, then per term:
        (u32 byte length | UTF-8 bytes | u64 postings count |
         postings count * (u32 doc position | u32 term frequency))
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import BinaryIO

import numpy as np

from ..errors import IngestError
from .dense import DenseIndex
from .lexical import LexicalIndex

DENSE_MAGIC = b"BBDI"
LEXICAL_MAGIC = b"BBLI"
VERSION = 1


def _write_str(fh: BinaryIO, value: str) -> None:
    raw = value.encode("utf-8")
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)


def _read_exact(fh: BinaryIO, size: int) -> bytes:
    raw = fh.read(size)
    if len(raw) != size:
        raise IngestError("parse", "truncated index file")
    return raw


def _read_str(fh: BinaryIO) -> str:
    (length,) = struct.unpack("<I", _read_exact(fh, 4))
    return _read_exact(fh, length).decode("utf-8")


def save_dense_index(index: DenseIndex, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(DENSE_MAGIC)
        fh.write(struct.pack("<IIQ", VERSION, index.dimension, len(index)))
        fh.write(np.ascontiguousarray(index.vectors, dtype="<f4").tobytes())
        for item_id in index.item_ids:
            _write_str(fh, item_id)


def load_dense_index(path: str | Path, space: str = "raw") -> DenseIndex:
    with open(path, "rb") as fh:
        if _read_exact(fh, 4) != DENSE_MAGIC:
            raise IngestError("parse", f"{path}: not a dense index file")
        version, dimension, count = struct.unpack("<IIQ", _read_exact(fh, 16))
        if version != VERSION:
            raise IngestError("parse", f"{path}: unsupported version {version}")
        raw = _read_exact(fh, count * dimension * 4)
        vectors = np.frombuffer(raw, dtype="<f4").reshape(count, dimension).copy()
        item_ids = [_read_str(fh) for _ in range(count)]
    return DenseIndex(item_ids=item_ids, vectors=vectors, space=space)


def save_lexical_index(index: LexicalIndex, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(LEXICAL_MAGIC)
        fh.write(struct.pack("<IddQ", VERSION, index.k1, index.b, len(index)))
        fh.write(np.asarray(index.doc_lengths, dtype="<u4").tobytes())
        for item_id in index.item_ids:
            _write_str(fh, item_id)
        terms = sorted(index.postings)
        fh.write(struct.pack("<Q", len(terms)))
        for term in terms:
            _write_str(fh, term)
            entries = index.postings[term]
            fh.write(struct.pack("<Q", len(entries)))
            for doc, tf in entries:
                fh.write(struct.pack("<II", doc, tf))


def load_lexical_index(path: str | Path, space: str = "raw") -> LexicalIndex:
    with open(path, "rb") as fh:
        if _read_exact(fh, 4) != LEXICAL_MAGIC:
            raise IngestError("parse", f"{path}: not a lexical index file")
        version, k1, b, count = struct.unpack("<IddQ", _read_exact(fh, 28))
        if version != VERSION:
            raise IngestError("parse", f"{path}: unsupported version {version}")
        doc_lengths = np.frombuffer(_read_exact(fh, count * 4), dtype="<u4").astype(
            np.float64
        )
        item_ids = [_read_str(fh) for _ in range(count)]
        (term_count,) = struct.unpack("<Q", _read_exact(fh, 8))
        postings: dict[str, list[tuple[int, int]]] = {}
        for _ in range(term_count):
            term = _read_str(fh)
            (entry_count,) = struct.unpack("<Q", _read_exact(fh, 8))
            entries = []
            for _ in range(entry_count):
                doc, tf = struct.unpack("<II", _read_exact(fh, 8))
                entries.append((doc, tf))
            postings[term] = entries
    return LexicalIndex(
        item_ids=item_ids,
        postings=postings,
        doc_lengths=doc_lengths,
        k1=k1,
        b=b,
        space=space,
    )
