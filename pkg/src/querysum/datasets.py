"""Turn a dataset directory into training samples."""

import numpy as np

from .errors import ConfigError
from .model import TextQuery, VisualQuery
from .querygen import generate_visual_query
from .store import load_embedding_table, load_queries, load_video_record
from .training import Sample


def _labels(n_shots, summary):
    y = np.zeros(n_shots, dtype=np.float32)
    y[np.asarray(summary, dtype=np.int64)] = 1.0
    return y


def load_samples(data_dir, split="train", modality="text", query_size=5):
    """Samples for one split; visual queries are generated from the ground
    truth via eigenvector centrality, exactly like the dataset construction."""
    if modality not in ("text", "visual"):
        raise ConfigError(f"modality must be 'text' or 'visual', got {modality!r}")
    queries = load_queries(data_dir)[split]
    table = load_embedding_table(data_dir) if modality == "text" else None
    videos = {}
    samples = []
    for q in queries:
        vid = q["video"]
        if vid not in videos:
            videos[vid] = load_video_record(data_dir, vid)
        rec = videos[vid]
        if modality == "text":
            emb = np.stack([table.lookup(q["c1"]), table.lookup(q["c2"])])
            query = TextQuery(q["c1"], q["c2"], emb)
        else:
            shots = generate_visual_query(q["summary"], rec.tags, k=query_size)
            query = VisualQuery.from_video(shots, rec.features)
        samples.append(
            Sample(
                video_id=vid,
                features=rec.features,
                tags=rec.tags,
                query=query,
                labels=_labels(rec.n_shots, q["summary"]),
            )
        )
    return samples
