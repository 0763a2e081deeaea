"""Frame record store with exact max-cosine retrieval and persistence.

Scoring follows the best-alignment rule: a frame's score against a text
embedding is the maximum cosine over its global embedding and every region
embedding. Retrieval is an exact scan (no ANN): embeddings live in one
contiguous float32 block, so top-k over desk-scale corpora is a single
matrix-vector product.

The on-disk format is little-endian throughout:

    magic "TZRIDX" | version u16 | dim u32 | record count u32 |
    vector count u32 | crc32 u32 of payload |
    payload = embedding block (vector count x dim, f32) + metadata block

Per-record metadata: frame_id u64, length-prefixed UTF-8 source_uri,
timestamp presence u8 (+ f64), region count u8, four u32 box coordinates
per region, params_fingerprint u64. The CRC covers the whole payload, so a
flipped byte anywhere is rejected at load.

Concurrency contract: many concurrent readers (topk, recall) or one
writer (insert, load) - not both.
"""

from __future__ import annotations

import json
import struct
import threading
import zlib
from dataclasses import dataclass, field

import numpy as np

from .core import Box, Embedding, FrameRef

MAGIC = b"TZRIDX"
FORMAT_VERSION = 1


class IndexFormatError(ValueError):
    """Base for index-file problems."""


class BadMagicError(IndexFormatError):
    pass


class VersionMismatchError(IndexFormatError):
    pass


class TruncatedIndexError(IndexFormatError):
    pass


class ChecksumError(IndexFormatError):
    pass


@dataclass(frozen=True)
class FrameRecord:
    """One retrievable frame: global embedding plus region embeddings with
    their box provenance."""

    frame: FrameRef
    global_embedding: Embedding
    regions: tuple[tuple[Embedding, Box], ...] = ()
    params_fingerprint: int = 0

    def __post_init__(self):
        dim = self.global_embedding.size
        for emb, _ in self.regions:
            if emb.size != dim:
                raise ValueError(
                    f"dimension mismatch: region has {emb.size} dims, global has {dim}"
                )
        object.__setattr__(self, "regions", tuple(self.regions))

    @property
    def dim(self) -> int:
        return int(self.global_embedding.size)

    def embedding_matrix(self) -> np.ndarray:
        """(1 + regions, dim) float32; row 0 is the global embedding."""
        rows = [np.asarray(self.global_embedding, dtype=np.float32)]
        rows.extend(np.asarray(e, dtype=np.float32) for e, _ in self.regions)
        return np.vstack(rows)


@dataclass(frozen=True)
class RetrievalResult:
    """Ranked hit: frame, score, and which embedding won the max."""

    frame_id: int
    score: float
    best_source: str  # "global" or "region:<j>", j counting regions from 1


@dataclass(frozen=True)
class EvalPair:
    """A query with the frame ids counted as relevant for it."""

    query: str
    relevant: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "relevant", frozenset(self.relevant))
        if not self.relevant:
            raise ValueError("eval pair needs at least one relevant frame id")


def score_frame(text_embedding: Embedding, record: FrameRecord) -> tuple[float, str]:
    """Best alignment between a text embedding and any part of the frame.

    Returns (max cosine over {global} + regions, winning source tag). On
    ties the global embedding wins; among regions the lowest index wins.
    """
    t = np.asarray(text_embedding, dtype=np.float64)
    if t.size != record.dim:
        raise ValueError(f"dimension mismatch: query {t.size} vs record {record.dim}")
    # Row-wise einsum, not a BLAS matvec: its per-row summation order does
    # not depend on the row count, so the global row scores bit-identically
    # with and without regions and adding regions can never lower the score.
    scores = np.einsum("rd,d->r", record.embedding_matrix().astype(np.float64), t)
    best = int(np.argmax(scores))  # first occurrence: global beats regions, low j wins
    score = min(1.0, max(-1.0, float(scores[best])))
    return score, "global" if best == 0 else f"region:{best}"


@dataclass
class _Packed:
    matrix: np.ndarray  # (total vectors, dim) float32
    starts: np.ndarray  # (records,) first row of each record
    counts: np.ndarray
    frame_ids: np.ndarray


class RetrievalIndex:
    """In-memory frame index with exact top-k retrieval."""

    def __init__(self, dim: int | None = None):
        self._dim = dim
        self._records: dict[int, FrameRecord] = {}
        self._packed: _Packed | None = None
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._records)

    @property
    def dim(self) -> int | None:
        return self._dim

    def records(self) -> list[FrameRecord]:
        return list(self._records.values())

    def get(self, frame_id: int) -> FrameRecord | None:
        return self._records.get(frame_id)

    def insert(self, record: FrameRecord) -> None:
        """Add a record; a duplicate frame_id replaces the prior record.

        The first insert fixes the index dimension.
        """
        if self._dim is None:
            self._dim = record.dim
        elif record.dim != self._dim:
            raise ValueError(
                f"dimension mismatch: record has {record.dim} dims, index has {self._dim}"
            )
        self._records[record.frame.frame_id] = record
        self._packed = None

    def _pack(self) -> _Packed:
        with self._lock:
            if self._packed is None:
                mats = [rec.embedding_matrix() for rec in self._records.values()]
                counts = np.array([m.shape[0] for m in mats], dtype=np.intp)
                starts = np.zeros_like(counts)
                if len(counts) > 1:
                    starts[1:] = np.cumsum(counts)[:-1]
                self._packed = _Packed(
                    matrix=np.vstack(mats) if mats else np.zeros((0, self._dim or 0), np.float32),
                    starts=starts,
                    counts=counts,
                    frame_ids=np.array(list(self._records.keys()), dtype=np.int64),
                )
            return self._packed

    def topk(self, text_embedding: Embedding, k: int, global_only: bool = False) -> list[RetrievalResult]:
        """Exact k best frames for a text embedding.

        Ties sort by frame_id ascending. `global_only` restricts scoring to
        the global embeddings (the standard-encoding baseline view of the
        same index).
        """
        if not self._records:
            raise ValueError("empty index")
        if k < 1:
            raise ValueError("k must be >= 1")
        t = np.asarray(text_embedding, dtype=np.float64)
        if t.size != self._dim:
            raise ValueError(f"dimension mismatch: query {t.size} vs index {self._dim}")

        packed = self._pack()
        scores = packed.matrix.astype(np.float64) @ t
        if global_only:
            per_record = scores[packed.starts]
        else:
            per_record = np.maximum.reduceat(scores, packed.starts)
        per_record = np.clip(per_record, -1.0, 1.0)

        order = np.lexsort((packed.frame_ids, -per_record))[: min(k, len(self._records))]
        results = []
        records = list(self._records.values())
        for idx in order:
            if global_only:
                source = "global"
                score = float(per_record[idx])
            else:
                start, count = packed.starts[idx], packed.counts[idx]
                local = scores[start : start + count]
                best = int(np.argmax(local))
                source = "global" if best == 0 else f"region:{best}"
                score = float(per_record[idx])
            results.append(
                RetrievalResult(
                    frame_id=int(packed.frame_ids[idx]),
                    score=score,
                    best_source=source,
                )
            )
        return results

    def recall_at_k(self, pairs, k: int, text_encoder, global_only: bool = False) -> float:
        """Fraction of pairs whose top-k results hit a relevant frame.

        Every relevant frame id must exist in the index; `text_encoder` is
        either an encoder client or a bare query -> embedding callable.
        """
        pairs = list(pairs)
        if not pairs:
            raise ValueError("no eval pairs")
        known = set(self._records.keys())
        for pair in pairs:
            missing = pair.relevant - known
            if missing:
                raise ValueError(f"eval pair {pair.query!r} references unknown frames {sorted(missing)}")
        encode = getattr(text_encoder, "encode_text", text_encoder)
        hits = 0
        for pair in pairs:
            t = encode(pair.query)
            top = self.topk(t, k, global_only=global_only)
            if any(r.frame_id in pair.relevant for r in top):
                hits += 1
        return hits / len(pairs)

    # --- persistence ---

    def save(self, path) -> None:
        """Write the index; load(save(x)) is bit-exact."""
        records = list(self._records.values())
        dim = self._dim or 0
        mats = [rec.embedding_matrix() for rec in records]
        total_vectors = sum(m.shape[0] for m in mats)

        emb_block = (
            np.vstack(mats).astype("<f4").tobytes() if mats else b""
        )
        meta = bytearray()
        for rec in records:
            uri = rec.frame.source_uri.encode("utf-8")
            meta += struct.pack("<QI", rec.frame.frame_id, len(uri))
            meta += uri
            if rec.frame.timestamp is None:
                meta += struct.pack("<B", 0)
            else:
                meta += struct.pack("<Bd", 1, rec.frame.timestamp)
            meta += struct.pack("<B", len(rec.regions))
            for _, box in rec.regions:
                meta += struct.pack("<IIII", box.x0, box.y0, box.x1, box.y1)
            meta += struct.pack("<Q", rec.params_fingerprint)

        payload = emb_block + bytes(meta)
        header = MAGIC + struct.pack(
            "<HIIII",
            FORMAT_VERSION,
            dim,
            len(records),
            total_vectors,
            zlib.crc32(payload),
        )
        with open(path, "wb") as fh:
            fh.write(header + payload)

    @classmethod
    def load(cls, path) -> "RetrievalIndex":
        """Read an index file, verifying magic, version, and checksum."""
        with open(path, "rb") as fh:
            blob = fh.read()
        header_len = len(MAGIC) + struct.calcsize("<HIIII")
        if len(blob) < header_len:
            raise TruncatedIndexError(f"{path}: file too short for header ({len(blob)} bytes)")
        if blob[: len(MAGIC)] != MAGIC:
            raise BadMagicError(f"{path}: bad magic {blob[:len(MAGIC)]!r}")
        version, dim, n_records, n_vectors, crc = struct.unpack_from("<HIIII", blob, len(MAGIC))
        if version != FORMAT_VERSION:
            raise VersionMismatchError(f"{path}: format version {version}, expected {FORMAT_VERSION}")
        payload = blob[header_len:]
        if zlib.crc32(payload) != crc:
            raise ChecksumError(f"{path}: payload checksum mismatch")

        emb_bytes = n_vectors * dim * 4
        if len(payload) < emb_bytes:
            raise TruncatedIndexError("embedding block truncated")
        vectors = np.frombuffer(payload[:emb_bytes], dtype="<f4").reshape(n_vectors, dim)

        index = cls(dim=dim if dim > 0 else None)
        offset = emb_bytes
        vec_at = 0

        def take(fmt: str):
            nonlocal offset
            size = struct.calcsize(fmt)
            if offset + size > len(payload):
                raise TruncatedIndexError("metadata block truncated")
            vals = struct.unpack_from(fmt, payload, offset)
            offset += size
            return vals

        for _ in range(n_records):
            frame_id, uri_len = take("<QI")
            if offset + uri_len > len(payload):
                raise TruncatedIndexError("metadata block truncated")
            uri = payload[offset : offset + uri_len].decode("utf-8")
            offset += uri_len
            (has_ts,) = take("<B")
            timestamp = take("<d")[0] if has_ts else None
            (n_regions,) = take("<B")
            if vec_at + 1 + n_regions > n_vectors:
                raise TruncatedIndexError("embedding block shorter than metadata claims")
            global_emb = vectors[vec_at].copy()
            vec_at += 1
            regions = []
            for _ in range(n_regions):
                x0, y0, x1, y1 = take("<IIII")
                regions.append((vectors[vec_at].copy(), Box(x0, y0, x1, y1)))
                vec_at += 1
            (fingerprint,) = take("<Q")
            index.insert(
                FrameRecord(
                    frame=FrameRef(frame_id=frame_id, source_uri=uri, timestamp=timestamp),
                    global_embedding=global_emb,
                    regions=tuple(regions),
                    params_fingerprint=fingerprint,
                )
            )
        if offset != len(payload) or vec_at != n_vectors:
            raise IndexFormatError("trailing bytes after metadata block")
        return index


# --- eval pairs file: JSON Lines, {"query": ..., "relevant": [ids]} ---


def save_eval_pairs(pairs, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps({"query": pair.query, "relevant": sorted(pair.relevant)}) + "\n")


def load_eval_pairs(path) -> list[EvalPair]:
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                pairs.append(EvalPair(query=obj["query"], relevant=frozenset(obj["relevant"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{line_no}: bad eval pair: {exc}") from exc
    return pairs
