"""On-disk formats: checkpoints, video records, embedding tables, synthetic data.

Everything numeric is little-endian float32 regardless of host.  Files are
immutable after write; the formats are plain JSON headers plus raw blobs so
they stay diff-able and dependency-free.

Layout of a dataset directory:

    videos/{id}/meta.json        id, n_shots, feature_dim, thumbnail_seed
    videos/{id}/features.bin     n_shots * feature_dim float32 LE
    videos/{id}/tags.json        list of per-shot tag lists
    videos/{id}/groundtruth.json default ground-truth summary for evaluation
    embeddings.json              {"dim": 300, "vocab": [...]}
    embeddings.bin               len(vocab) * dim float32 LE
    queries.json                 train/heldout query annotations
"""

import json
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataFormatError, VocabularyError
from .model import ModelConfig, QuerysumModel

CHECKPOINT_MAGIC = b"IVZR1"
CHECKPOINT_VERSION = 1
CHECKPOINT_SUFFIX = ".ivzr"

F32 = np.dtype("<f4")


def _dump_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(path, model: QuerysumModel):
    named = model.params()
    tensors = []
    offset = 0
    blobs = []
    for name, p in named:
        blob = np.ascontiguousarray(p.value, dtype=F32).tobytes()
        tensors.append(
            {"name": name, "shape": list(p.shape), "offset": offset, "nbytes": len(blob)}
        )
        blobs.append(blob)
        offset += len(blob)
    header = _dump_json(
        {
            "format_version": CHECKPOINT_VERSION,
            "config": model.cfg.to_dict(),
            "tensors": tensors,
        }
    )
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path):
    with open(path, "rb") as fh:
        magic = fh.read(len(CHECKPOINT_MAGIC))
        if magic != CHECKPOINT_MAGIC:
            raise DataFormatError(f"bad checkpoint magic {magic!r}")
        (header_len,) = struct.unpack("<I", fh.read(4))
        try:
            header = json.loads(fh.read(header_len).decode("utf-8"))
        except (ValueError, UnicodeDecodeError) as exc:
            raise DataFormatError(f"unreadable checkpoint header: {exc}")
        if header.get("format_version") != CHECKPOINT_VERSION:
            raise DataFormatError(
                f"unsupported checkpoint version {header.get('format_version')}"
            )
        payload = fh.read()

    cfg = ModelConfig(**header["config"])
    model = QuerysumModel(cfg, seed=0)
    params = dict(model.params())
    index = {t["name"]: t for t in header["tensors"]}
    missing = sorted(set(params) - set(index))
    unknown = sorted(set(index) - set(params))
    if missing or unknown:
        raise DataFormatError(
            f"tensor index mismatch: missing={missing[:5]} unknown={unknown[:5]}"
        )
    dtype = np.float64 if cfg.dtype == "f64" else np.float32
    for name, t in index.items():
        start, nbytes = t["offset"], t["nbytes"]
        if start + nbytes > len(payload):
            raise DataFormatError(f"truncated checkpoint payload at tensor {name!r}")
        arr = np.frombuffer(payload[start : start + nbytes], dtype=F32)
        shape = tuple(t["shape"])
        if arr.size != int(np.prod(shape)):
            raise DataFormatError(f"shape/byte mismatch for tensor {name!r}")
        p = params[name]
        if p.shape != shape:
            raise DataFormatError(
                f"tensor {name!r} has shape {shape}, model expects {p.shape}"
            )
        p.value[...] = arr.reshape(shape).astype(dtype)
    return model


# ---------------------------------------------------------------------------
# video records


@dataclass
class VideoRecord:
    video_id: str
    features: np.ndarray  # [T, d] float32
    tags: list  # T tag lists
    thumbnail_seed: int
    ground_truth: list | None = None

    @property
    def n_shots(self):
        return self.features.shape[0]


def video_dir(data_dir, video_id):
    return os.path.join(data_dir, "videos", video_id)


def save_video_record(data_dir, rec: VideoRecord):
    d = video_dir(data_dir, rec.video_id)
    os.makedirs(d, exist_ok=True)
    t, dim = rec.features.shape
    if len(rec.tags) != t:
        raise DataFormatError(f"{t} shots but {len(rec.tags)} tag lists")
    meta = {
        "id": rec.video_id,
        "n_shots": t,
        "feature_dim": dim,
        "thumbnail_seed": int(rec.thumbnail_seed),
    }
    with open(os.path.join(d, "meta.json"), "wb") as fh:
        fh.write(_dump_json(meta))
    with open(os.path.join(d, "features.bin"), "wb") as fh:
        fh.write(np.ascontiguousarray(rec.features, dtype=F32).tobytes())
    with open(os.path.join(d, "tags.json"), "wb") as fh:
        fh.write(_dump_json(rec.tags))
    if rec.ground_truth is not None:
        with open(os.path.join(d, "groundtruth.json"), "wb") as fh:
            fh.write(_dump_json({"summary": [int(i) for i in rec.ground_truth]}))


def load_video_record(data_dir, video_id):
    d = video_dir(data_dir, video_id)
    try:
        with open(os.path.join(d, "meta.json")) as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        raise DataFormatError(f"no such video record: {video_id}")
    t, dim = meta["n_shots"], meta["feature_dim"]
    expected = 4 * t * dim
    with open(os.path.join(d, "features.bin"), "rb") as fh:
        blob = fh.read()
    if len(blob) != expected:
        raise DataFormatError(
            f"feature blob for {video_id} is {len(blob)} bytes, expected {expected}"
        )
    features = np.frombuffer(blob, dtype=F32).reshape(t, dim).astype(np.float32)
    with open(os.path.join(d, "tags.json")) as fh:
        tags = json.load(fh)
    if len(tags) != t:
        raise DataFormatError(f"tags length {len(tags)} != n_shots {t}")
    gt = None
    gt_path = os.path.join(d, "groundtruth.json")
    if os.path.exists(gt_path):
        with open(gt_path) as fh:
            gt = json.load(fh)["summary"]
    return VideoRecord(video_id, features, tags, meta["thumbnail_seed"], gt)


def list_videos(data_dir):
    root = os.path.join(data_dir, "videos")
    if not os.path.isdir(root):
        return []
    return sorted(
        name for name in os.listdir(root)
        if os.path.isfile(os.path.join(root, name, "meta.json"))
    )


# ---------------------------------------------------------------------------
# embedding table


EMBEDDING_DIM = 300


@dataclass
class EmbeddingTable:
    vocab: list
    vectors: np.ndarray  # [V, EMBEDDING_DIM]

    def __post_init__(self):
        self._index = {c: i for i, c in enumerate(self.vocab)}
        if len(self._index) != len(self.vocab):
            raise DataFormatError("embedding vocabulary contains duplicates")

    def lookup(self, concept):
        try:
            return self.vectors[self._index[concept]]
        except KeyError:
            raise VocabularyError(
                f"unknown concept {concept!r}; known: {sorted(self.vocab)}"
            )

    def __contains__(self, concept):
        return concept in self._index


def save_embedding_table(data_dir, table: EmbeddingTable):
    if table.vectors.shape != (len(table.vocab), EMBEDDING_DIM):
        raise DataFormatError(
            f"embedding vectors must be [{len(table.vocab)}, {EMBEDDING_DIM}]"
        )
    with open(os.path.join(data_dir, "embeddings.json"), "wb") as fh:
        fh.write(_dump_json({"dim": EMBEDDING_DIM, "vocab": table.vocab}))
    with open(os.path.join(data_dir, "embeddings.bin"), "wb") as fh:
        fh.write(np.ascontiguousarray(table.vectors, dtype=F32).tobytes())


def load_embedding_table(data_dir):
    with open(os.path.join(data_dir, "embeddings.json")) as fh:
        meta = json.load(fh)
    if meta["dim"] != EMBEDDING_DIM:
        raise DataFormatError(f"embedding dim {meta['dim']} != {EMBEDDING_DIM}")
    vocab = meta["vocab"]
    with open(os.path.join(data_dir, "embeddings.bin"), "rb") as fh:
        blob = fh.read()
    expected = 4 * len(vocab) * EMBEDDING_DIM
    if len(blob) != expected:
        raise DataFormatError(
            f"embedding blob is {len(blob)} bytes, expected {expected}"
        )
    vectors = np.frombuffer(blob, dtype=F32).reshape(len(vocab), EMBEDDING_DIM)
    return EmbeddingTable(vocab, vectors.astype(np.float32))


# ---------------------------------------------------------------------------
# synthetic dataset


def synth_dataset(
    out_dir,
    seed=42,
    n_videos=4,
    n_shots=256,
    feature_dim=64,
    vocab_size=16,
    queries_per_video=6,
    heldout_videos=1,
    planted_rate=0.125,
    noise_scale=0.02,
):
    """Generate a deterministic synthetic dataset directory.

    Shots carry 2 base tags drawn at random; each query plants both of its
    concepts on a contiguous run of ~``planted_rate`` of the shots.  A shot
    is a ground-truth summary member for a query exactly when it carries
    both query concepts.  Features are the mean of the shots' tag prototypes
    plus Gaussian noise.

    The last ``heldout_videos`` videos form the held-out split (capped at
    n_videos - 1): evaluation is on videos never seen in training, while the
    held-out query pairs themselves recur in other videos' training queries.
    """
    if vocab_size < 2:
        raise ConfigError(f"vocab_size must be >= 2, got {vocab_size}")
    if n_shots < 16:
        raise ConfigError(f"n_shots must be >= 16, got {n_shots}")
    rng = np.random.default_rng(seed)
    os.makedirs(out_dir, exist_ok=True)

    vocab = [f"tag{i:02d}" for i in range(vocab_size)]
    prototypes = rng.standard_normal((vocab_size, feature_dim)).astype(np.float32)
    prototypes /= np.linalg.norm(prototypes, axis=1, keepdims=True)
    # Word vectors share latent structure with the feature prototypes (as
    # jointly trained text/visual embedding spaces do): the prototype is
    # embedded in the leading dimensions plus independent noise, so the
    # query-to-shot correspondence is learnable from small data.
    word_vectors = 0.1 * rng.standard_normal((vocab_size, EMBEDDING_DIM)).astype(np.float32)
    shared = min(feature_dim, EMBEDDING_DIM)
    word_vectors[:, :shared] += prototypes[:, :shared]
    word_vectors /= np.linalg.norm(word_vectors, axis=1, keepdims=True)
    save_embedding_table(out_dir, EmbeddingTable(vocab, word_vectors))

    n_planted = max(3, int(round(planted_rate * n_shots)))
    n_slots = n_shots // n_planted
    if n_slots < queries_per_video:
        raise ConfigError(
            f"{queries_per_video} queries need {queries_per_video} events "
            f"of {n_planted} shots but only {n_slots} fit in {n_shots}"
        )

    # All videos draw their query pairs from one shared pool, so a pair that
    # is held out for one video is usually a training pair for another; the
    # held-out split then measures query-conditioned generalization rather
    # than zero-shot concept composition.
    # Pool pairs are concept-disjoint whenever the vocabulary is large enough
    # (a random perfect matching): no concept appears in two pool pairs, so
    # no event shares a tag with another query's event.  That keeps queries
    # unambiguous and denies IOU partial credit to off-event selections.
    if 2 * queries_per_video <= vocab_size:
        matched = rng.permutation(vocab_size)
        pool = [
            tuple(sorted((int(matched[2 * i]), int(matched[2 * i + 1]))))
            for i in range(queries_per_video)
        ]
    else:
        all_pairs = [(a, b) for a in range(vocab_size) for b in range(a + 1, vocab_size)]
        pool_idx = rng.permutation(len(all_pairs))[: min(len(all_pairs), queries_per_video)]
        pool = [all_pairs[i] for i in pool_idx]
    pool_size = len(pool)

    heldout_videos = max(0, min(heldout_videos, n_videos - 1))
    queries = {"train": [], "heldout": []}
    audit = []
    for v in range(n_videos):
        video_id = f"video-{v}"
        split = "heldout" if v >= n_videos - heldout_videos else "train"
        # Background shots draw their tags from concepts outside the query
        # pool when enough remain: ground-truth shots are then the only
        # shots sharing any tag with their query, so IOU matching gives no
        # credit for off-event selections.
        pool_concepts = {c for pair in pool for c in pair}
        background = [c for c in range(vocab_size) if c not in pool_concepts]
        if len(background) < 2:
            background = list(range(vocab_size))
        tags = [
            sorted(rng.choice(background, size=2, replace=False).tolist())
            for _ in range(n_shots)
        ]
        pair_list = [pool[i] for i in rng.permutation(pool_size)[:queries_per_video]]
        # Each query's shots form one contiguous event (like real video),
        # carrying the two query concepts and nothing else: contiguity keeps
        # the signal visible at segment granularity, distinct tags keep the
        # shots distinctive under IOU-based evaluation.  Events occupy
        # disjoint slots so no query's event is overwritten by another's.
        slots = rng.permutation(n_slots)[:queries_per_video]
        for (a, b), slot in zip(pair_list, slots):
            start = int(slot) * n_planted
            for t in range(start, start + n_planted):
                tags[t] = sorted((int(a), int(b)))

        tag_names = [[vocab[i] for i in row] for row in tags]
        features = np.zeros((n_shots, feature_dim), dtype=np.float32)
        for t in range(n_shots):
            features[t] = prototypes[tags[t]].mean(axis=0)
        features += noise_scale * rng.standard_normal(features.shape).astype(np.float32)

        records = []
        for qi, (a, b) in enumerate(pair_list):
            c1, c2 = vocab[a], vocab[b]
            summary = [
                t for t in range(n_shots)
                if c1 in tag_names[t] and c2 in tag_names[t]
            ]
            audit.append(len(summary) / n_shots)
            records.append({"video": video_id, "c1": c1, "c2": c2, "summary": summary})
        queries[split].extend(records)

        save_video_record(
            out_dir,
            VideoRecord(
                video_id=video_id,
                features=features,
                tags=tag_names,
                thumbnail_seed=seed * 1000 + v,
                ground_truth=records[0]["summary"],
            ),
        )

    with open(os.path.join(out_dir, "queries.json"), "wb") as fh:
        fh.write(_dump_json(queries))

    rate_lo, rate_hi = min(audit), max(audit)
    if not (0.01 <= rate_lo and rate_hi <= 0.16):
        raise DataFormatError(
            f"planted positive rate out of range: [{rate_lo:.3f}, {rate_hi:.3f}]"
        )
    return {"videos": n_videos, "positive_rate": [rate_lo, rate_hi]}


def load_queries(data_dir):
    with open(os.path.join(data_dir, "queries.json")) as fh:
        return json.load(fh)
