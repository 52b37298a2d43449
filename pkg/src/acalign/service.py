"""HTTP service for the drawing game and the click-line game.

Endpoints:

* ``POST /api/detect`` — run a detector on a submitted dot pattern; the
  response body is byte-identical to the CLI detection output.
* ``POST /api/archive``, ``GET /api/archive``, ``GET /api/archive/{id}``
  — append-only archive of submitted patterns, persisted as JSON lines
  and rebuilt into memory on startup.
* ``GET /api/game/clickline/next``, ``POST /api/game/clickline/answer``
  — sequences of ten positive stimuli; the player clicks where the
  planted alignment is, the score decays linearly with the distance and
  the difficulty tier adapts after each sequence.

Configuration comes from environment variables: ``ACALIGN_ARCHIVE``
(persistence file), ``ACALIGN_N_CAP`` (maximum pattern size),
``ACALIGN_STATIC`` (frontend bundle directory), ``ACALIGN_HOST`` and
``ACALIGN_PORT`` (bind address of the ``main()`` runner).
"""

from __future__ import annotations

import datetime
import itertools
import json
import math
import os
import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import Body, FastAPI, HTTPException, Query, Response
from fastapi.staticfiles import StaticFiles

from . import dots, harness, io, masking, stimuli

DEFAULT_N_CAP = 2000
SEQUENCE_LENGTH = 10

# Difficulty ladder from very easy (long, no jitter) to very hard
# (short, almost isotropic); the adaptive rule walks this list.
TIER_LADDER: tuple[tuple[int, float], ...] = (
    (10, 0.0),
    (9, math.pi / 5),
    (8, math.pi / 4),
    (7, math.pi / 3),
    (6, math.pi / 2),
    (5, 2 * math.pi / 3),
    (4, 3 * math.pi / 4),
    (3, 4 * math.pi / 5),
)
HARDER_MEAN = 70.0
EASIER_MEAN = 40.0


# ---------------------------------------------------------------------------
# Archive


class Archive:
    """Append-only JSONL-backed archive with an in-memory index."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: dict[str, dict] = {}
        self._order: list[str] = []
        self._load()

    def _load(self) -> None:
        if not self.path.exists():
            return
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                entry = json.loads(line)
                self._entries[entry["id"]] = entry
                self._order.append(entry["id"])

    def append(self, entry: dict) -> dict:
        with self._lock:
            if entry.get("parent_id") is not None \
                    and entry["parent_id"] not in self._entries:
                raise KeyError(entry["parent_id"])
            entry = dict(entry)
            entry["id"] = secrets.token_hex(8)
            entry["timestamp"] = datetime.datetime.now(
                datetime.timezone.utc).isoformat()
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(io._round_tree(entry),
                                    separators=(",", ":")) + "\n")
            self._entries[entry["id"]] = entry
            self._order.append(entry["id"])
            return entry

    def get(self, entry_id: str) -> dict:
        return self._entries[entry_id]

    def page(self, page: int, page_size: int) -> dict:
        newest_first = list(reversed(self._order))
        start = page * page_size
        ids = newest_first[start:start + page_size]
        return {
            "page": page,
            "page_size": page_size,
            "total": len(self._order),
            "entries": [self._entries[i] for i in ids],
        }


# ---------------------------------------------------------------------------
# Click-line sessions


@dataclass
class ClicklineSession:
    token: str
    rng: np.random.Generator
    tier: int = 0
    sequence: int = 0
    trial_in_sequence: int = 0
    scores: list[float] = field(default_factory=list)
    pending: stimuli.StimulusRecord | None = None
    pending_id: str | None = None
    pending_payload: dict | None = None
    history: list[dict] = field(default_factory=list)

    def next_stimulus(self) -> dict:
        if self.pending is not None:
            # an unanswered stimulus is re-served, never regenerated
            return self.pending_payload
        length, jitter = TIER_LADDER[self.tier]
        seed = int(self.rng.integers(0, 2**62))
        record = stimuli.generate(stimuli.StimulusSpec(
            kind="positive", n=200, length=length, jitter=jitter, seed=seed))
        self.pending = record
        self.pending_id = f"{self.token}-{self.sequence}-{self.trial_in_sequence}"
        self.pending_payload = {
            "session": self.token,
            "stimulus_id": self.pending_id,
            "sequence": self.sequence,
            "trial": self.trial_in_sequence,
            "tier": self.tier,
            "field": io.field_to_dict(record.field),
        }
        return self.pending_payload

    def answer(self, x: float, y: float) -> dict:
        record = self.pending
        truth = record.truth
        d = harness.point_segment_distance(
            x, y, truth.x1, truth.y1, truth.x2, truth.y2)
        d_max = math.hypot(record.field.width, record.field.height) / 4.0
        score = 100.0 * max(0.0, 1.0 - d / d_max)
        self.scores.append(score)
        self.trial_in_sequence += 1
        result = {
            "session": self.token,
            "stimulus_id": self.pending_id,
            "distance": d,
            "score": score,
            "truth": {"x1": truth.x1, "y1": truth.y1,
                      "x2": truth.x2, "y2": truth.y2},
            "tier": self.tier,
            "sequence_complete": False,
        }
        self.history.append({"stimulus_id": self.pending_id,
                             "distance": d, "score": score})
        self.pending = None
        self.pending_id = None
        self.pending_payload = None
        if self.trial_in_sequence >= SEQUENCE_LENGTH:
            mean = sum(self.scores) / len(self.scores)
            if mean >= HARDER_MEAN:
                self.tier = min(self.tier + 1, len(TIER_LADDER) - 1)
            elif mean <= EASIER_MEAN:
                self.tier = max(self.tier - 1, 0)
            result.update(sequence_complete=True, sequence_mean=mean,
                          next_tier=self.tier)
            self.sequence += 1
            self.trial_in_sequence = 0
            self.scores = []
        return result


# ---------------------------------------------------------------------------
# Application factory


def _json_response(payload) -> Response:
    return Response(content=io.dump_bytes(payload),
                    media_type="application/json")


def create_app(archive_path: str | Path | None = None,
               n_cap: int | None = None,
               static_dir: str | Path | None = None,
               game_seed: int | None = None) -> FastAPI:
    archive_path = archive_path or os.environ.get(
        "ACALIGN_ARCHIVE", "archive.jsonl")
    if n_cap is None:
        n_cap = int(os.environ.get("ACALIGN_N_CAP", DEFAULT_N_CAP))
    static_dir = static_dir or os.environ.get("ACALIGN_STATIC")

    app = FastAPI(title="acalign service")
    archive = Archive(archive_path)
    sessions: dict[str, ClicklineSession] = {}
    sessions_lock = threading.Lock()
    session_counter = itertools.count()
    root_rng = np.random.default_rng(game_seed)
    app.state.archive = archive

    def _run_detection(data: dict) -> tuple[dict, dict, list]:
        try:
            pattern = io.pattern_from_dict(data.get("pattern") or {})
        except io.SchemaError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        if pattern.n > n_cap:
            raise HTTPException(
                status_code=413,
                detail=f"pattern has {pattern.n} points, cap is {n_cap}")
        config = data.get("config") or {}
        mode = config.get("mode", "refined")
        filt = config.get("filter", "none")
        epsilon = float(config.get("epsilon", 1.0))
        if mode not in ("basic", "refined"):
            raise HTTPException(status_code=400,
                                detail=f"config.mode: unknown mode {mode!r}")
        if filt not in ("none", "exclusion", "masking"):
            raise HTTPException(status_code=400,
                                detail=f"config.filter: unknown filter {filt!r}")
        detections = dots.detect(pattern, mode=mode, epsilon=epsilon)
        if filt != "none":
            cands = masking.from_dot_detections(pattern, detections)
            detections = [c.detection
                          for c in masking.apply_filter(cands, filt, epsilon)]
        config = {"mode": mode, "filter": filt, "epsilon": epsilon}
        return io.pattern_to_dict(pattern), config, detections

    @app.post("/api/detect")
    def detect(data: dict = Body(...)):
        _, _, detections = _run_detection(data)
        return Response(content=io.detections_to_bytes(detections),
                        media_type="application/json")

    @app.post("/api/archive")
    def archive_post(data: dict = Body(...)):
        pattern_dict, config, detections = _run_detection(data)
        entry = {
            "pattern": pattern_dict,
            "config": config,
            "detections": [io.detection_to_dict(d) for d in detections],
            "note": data.get("note"),
            "parent_id": data.get("parent_id"),
        }
        try:
            stored = archive.append(entry)
        except KeyError as exc:
            raise HTTPException(status_code=400,
                                detail=f"parent_id: unknown entry {exc}")
        return _json_response(stored)

    @app.get("/api/archive")
    def archive_list(page: int = Query(0, ge=0),
                     page_size: int = Query(20, ge=1, le=100)):
        return _json_response(archive.page(page, page_size))

    @app.get("/api/archive/{entry_id}")
    def archive_get(entry_id: str):
        try:
            return _json_response(archive.get(entry_id))
        except KeyError:
            raise HTTPException(status_code=404,
                                detail=f"unknown archive entry {entry_id}")

    @app.get("/api/game/clickline/next")
    def clickline_next(session: str | None = None):
        with sessions_lock:
            if session is None or session not in sessions:
                token = f"s{next(session_counter)}-{secrets.token_hex(6)}"
                child = np.random.default_rng(
                    root_rng.integers(0, 2**62))
                sess = ClicklineSession(token=token, rng=child)
                sessions[token] = sess
            else:
                sess = sessions[session]
            return _json_response(sess.next_stimulus())

    @app.post("/api/game/clickline/answer")
    def clickline_answer(data: dict = Body(...)):
        token = data.get("session")
        with sessions_lock:
            sess = sessions.get(token)
            if sess is None or sess.pending is None:
                raise HTTPException(status_code=409,
                                    detail="no stimulus awaiting an answer")
            x, y = data.get("x"), data.get("y")
            if not isinstance(x, (int, float)) or not isinstance(y, (int, float)):
                raise HTTPException(status_code=400,
                                    detail="x, y: numeric click required")
            fld = sess.pending.field
            if not (0 <= x <= fld.width and 0 <= y <= fld.height):
                raise HTTPException(status_code=400,
                                    detail="click outside the stimulus domain")
            return _json_response(sess.answer(float(x), float(y)))

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="static")
    return app


def main() -> None:
    """Run the service with uvicorn, configured from the environment."""
    import uvicorn

    uvicorn.run(create_app(),
                host=os.environ.get("ACALIGN_HOST", "127.0.0.1"),
                port=int(os.environ.get("ACALIGN_PORT", "8000")))


if __name__ == "__main__":
    main()
