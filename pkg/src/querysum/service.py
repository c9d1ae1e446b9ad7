"""HTTP backend for the steering UI.

Five endpoint groups: preparation (available artifacts), model inference
(intent probabilities + the full per-intent shot-score matrix), shot frames,
shot GIFs, and quantitative evaluation.  Mixing the overall score and
selecting the summary are deliberately NOT done server-side; the client
re-mixes from the returned matrix.

The pure logic lives in :class:`Backend`, which the CLI shares so that
``querysum infer``/``eval`` and the HTTP endpoints are byte-identical.
Responses are canonical JSON (sorted keys, no whitespace) and inference
responses are cached per (checkpoint, video, query).
"""

import json
import os

import numpy as np

from . import images
from .errors import DataFormatError, InputError, QuerysumError, VocabularyError
from .evaluation import evaluate_summary
from .model import VisualQuery
from .store import (
    CHECKPOINT_SUFFIX,
    list_videos,
    load_checkpoint,
    load_embedding_table,
    load_video_record,
)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class NotFound(QuerysumError):
    pass


class Backend:
    """Read-only registry over a data directory plus inference caches."""

    def __init__(self, data_dir):
        self.data_dir = data_dir
        self._models = {}
        self._videos = {}
        self._table = None
        self._h_cache = {}  # (ckpt, video) -> H matrix
        self._responses = {}  # cache key -> canonical JSON string

    # -- registry ----------------------------------------------------------

    def checkpoint_ids(self):
        root = os.path.join(self.data_dir, "checkpoints")
        if not os.path.isdir(root):
            return []
        return sorted(
            f[: -len(CHECKPOINT_SUFFIX)]
            for f in os.listdir(root)
            if f.endswith(CHECKPOINT_SUFFIX)
        )

    def embedding_table(self):
        if self._table is None:
            try:
                self._table = load_embedding_table(self.data_dir)
            except FileNotFoundError:
                raise NotFound("no embedding table installed")
        return self._table

    def video(self, video_id):
        if video_id not in self._videos:
            try:
                self._videos[video_id] = load_video_record(self.data_dir, video_id)
            except DataFormatError:
                raise NotFound(f"unknown video {video_id!r}")
        return self._videos[video_id]

    def model(self, ckpt_id):
        if ckpt_id not in self._models:
            path = os.path.join(
                self.data_dir, "checkpoints", ckpt_id + CHECKPOINT_SUFFIX
            )
            if not os.path.isfile(path):
                raise NotFound(f"unknown checkpoint {ckpt_id!r}")
            self._models[ckpt_id] = load_checkpoint(path)
        return self._models[ckpt_id]

    # -- endpoint groups -----------------------------------------------------

    def prepare(self):
        try:
            concepts = list(self.embedding_table().vocab)
        except NotFound:
            concepts = []
        return {
            "videos": list_videos(self.data_dir),
            "checkpoints": self.checkpoint_ids(),
            "concepts": concepts,
        }

    def _h_matrix(self, ckpt_id, video_id):
        key = (ckpt_id, video_id)
        if key not in self._h_cache:
            model = self.model(ckpt_id)
            rec = self.video(video_id)
            h_matrix, _ = model.summary_forward(rec.features)
            self._h_cache[key] = h_matrix
        return self._h_cache[key]

    def _inference(self, cache_key, ckpt_id, video_id, query_builder):
        if cache_key in self._responses:
            return self._responses[cache_key]
        model = self.model(ckpt_id)
        rec = self.video(video_id)
        h_matrix = self._h_matrix(ckpt_id, video_id)
        query = query_builder(model, rec)
        g, _ = model.intent_forward(rec.features, query)
        body = canonical_json(
            {
                "checkpoint": ckpt_id,
                "video": video_id,
                "delta": model.cfg.delta,
                "intent_probs": [float(x) for x in g],
                "intent_shot_scores": [[float(x) for x in row] for row in h_matrix],
            }
        )
        self._responses[cache_key] = body
        return body

    def infer_text(self, ckpt_id, video_id, c1, c2):
        from .model import TextQuery

        def build(model, rec):
            table = self.embedding_table()
            for c in (c1, c2):
                if c not in table:
                    raise VocabularyError(
                        f"unknown concept {c!r} (vocabulary has {len(table.vocab)} entries)"
                    )
            return TextQuery(c1, c2, np.stack([table.lookup(c1), table.lookup(c2)]))

        return self._inference(("text", ckpt_id, video_id, c1, c2), ckpt_id, video_id, build)

    def infer_visual(self, ckpt_id, video_id, shots):
        shots = [int(s) for s in shots]

        def build(model, rec):
            return VisualQuery.from_video(shots, rec.features)

        key = ("visual", ckpt_id, video_id, tuple(shots))
        return self._inference(key, ckpt_id, video_id, build)

    def frame_png(self, video_id, shot):
        rec = self.video(video_id)
        if not 0 <= shot < rec.n_shots:
            raise NotFound(f"shot {shot} out of range [0, {rec.n_shots})")
        return images.frame_png(rec.thumbnail_seed, shot, rec.tags[shot])

    def shot_gif(self, video_id, shot):
        rec = self.video(video_id)
        if not 0 <= shot < rec.n_shots:
            raise NotFound(f"shot {shot} out of range [0, {rec.n_shots})")
        return images.shot_gif(rec.thumbnail_seed, shot, rec.tags[shot])

    def evaluate(self, video_id, summary, mask=None):
        rec = self.video(video_id)
        if rec.ground_truth is None:
            raise NotFound(f"no ground truth installed for video {video_id!r}")
        result = evaluate_summary(summary, rec.ground_truth, rec.tags, mask=mask)
        return canonical_json(result.to_dict())


# ---------------------------------------------------------------------------
# FastAPI wiring


def create_app(data_dir):
    from fastapi import FastAPI, HTTPException, Query, Response
    from pydantic import BaseModel

    backend = Backend(data_dir)
    app = FastAPI(title="querysum service")
    app.state.backend = backend

    def guard(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except NotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except (InputError, VocabularyError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except QuerysumError as exc:
            raise HTTPException(status_code=500, detail=str(exc))

    def json_response(body: str):
        return Response(content=body, media_type="application/json")

    @app.get("/api/prepare")
    def prepare():
        try:
            return json_response(canonical_json(backend.prepare()))
        except OSError as exc:
            raise HTTPException(status_code=500, detail=f"unreadable data dir: {exc}")

    @app.get("/api/infer")
    def infer(c1: str, c2: str, video: str, ckpt: str):
        return json_response(guard(backend.infer_text, ckpt, video, c1, c2))

    class VisualInferRequest(BaseModel):
        video: str
        ckpt: str
        shots: list[int]

    @app.post("/api/infer/visual")
    def infer_visual(req: VisualInferRequest):
        return json_response(guard(backend.infer_visual, req.ckpt, req.video, req.shots))

    @app.get("/api/shot/frame")
    def shot_frame(video: str, shot: int = Query(ge=0)):
        png = guard(backend.frame_png, video, shot)
        return Response(content=png, media_type="image/png")

    @app.get("/api/shot/gif")
    def shot_gif(video: str, shot: int = Query(ge=0)):
        gif = guard(backend.shot_gif, video, shot)
        return Response(content=gif, media_type="image/gif")

    class EvaluateRequest(BaseModel):
        video: str
        summary: list[int]
        mask: list[int] | None = None

    @app.post("/api/evaluate")
    def evaluate(req: EvaluateRequest):
        return json_response(guard(backend.evaluate, req.video, req.summary, req.mask))

    return app
