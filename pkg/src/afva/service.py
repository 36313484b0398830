"""Annotation collection service.

Workers rate images on two 9-point integer axes. The protocol enforced
here: per-worker randomized sequences seeded for reproducible audits, the
previous image shown alongside its recorded rating as an anchor, a 200
question cap per worker, once-per-worker-per-image uniqueness, and label
finalization at five or more ratings via the arithmetic mean.

The append-only JSON-lines rating log is the source of truth: every
aggregate is derived by replay, and an event is fsynced before it is
acknowledged.
"""

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from afva import pipeline
from afva.errors import (
    ConflictError,
    CorruptionError,
    OrderingError,
    QuotaError,
    RatingValidationError,
    UnknownResourceError,
)

WORKER_QUESTION_CAP = 200
MIN_RATINGS_TO_FINALIZE = 5
RATING_MIN, RATING_MAX = 1, 9


@dataclass(frozen=True)
class RatingEvent:
    worker_id: str
    image_id: str
    valence: int
    arousal: int
    timestamp: int  # UTC seconds

    def to_json(self) -> dict:
        return {
            "worker_id": self.worker_id,
            "image_id": self.image_id,
            "valence": self.valence,
            "arousal": self.arousal,
            "timestamp": self.timestamp,
        }

    @staticmethod
    def from_json(obj: dict) -> "RatingEvent":
        return RatingEvent(
            worker_id=obj["worker_id"],
            image_id=obj["image_id"],
            valence=obj["valence"],
            arousal=obj["arousal"],
            timestamp=obj["timestamp"],
        )


@dataclass
class WorkerSession:
    session_id: str
    worker_id: str
    order: list[str]
    cursor: int = 0


@dataclass(frozen=True)
class AggregateLabel:
    image_id: str
    n_ratings: int
    valence_mean: float | None
    arousal_mean: float | None

    @property
    def finalized(self) -> bool:
        return self.n_ratings >= MIN_RATINGS_TO_FINALIZE

    def to_json(self) -> dict:
        return {
            "image_id": self.image_id,
            "n_ratings": self.n_ratings,
            "valence_mean": self.valence_mean,
            "arousal_mean": self.arousal_mean,
            "finalized": self.finalized,
        }


def _validate_rating_value(name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise RatingValidationError(f"{name} must be an integer, got {value!r}")
    if not RATING_MIN <= value <= RATING_MAX:
        raise RatingValidationError(
            f"{name} must lie in [{RATING_MIN}, {RATING_MAX}], got {value}"
        )
    return value


class AnnotationStore:
    """Rating log, per-worker state, and aggregates, behind one lock.

    The log append and the in-memory state update are atomic with respect to
    concurrent submissions; replaying the log from empty reproduces the
    state exactly.
    """

    def __init__(self, image_ids, log_path, server_seed: int = 0):
        self.image_ids = list(image_ids)
        self._image_id_set = set(self.image_ids)
        if len(self._image_id_set) != len(self.image_ids):
            raise ValueError("image ids must be unique")
        self.log_path = Path(log_path)
        self.server_seed = server_seed
        self._lock = threading.Lock()
        self._log_file = None
        self._sessions: dict[str, WorkerSession] = {}
        self._session_counter = 0

        self._events: list[RatingEvent] = []
        self._by_worker: dict[str, dict[str, RatingEvent]] = {}
        self._last_rating: dict[str, RatingEvent] = {}
        self._sums: dict[str, tuple[int, int, int]] = {}  # n, sum_v, sum_a

        if self.log_path.exists():
            self._replay()
        self._log_file = open(self.log_path, "a", encoding="utf-8")

    def _replay(self) -> None:
        with open(self.log_path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    event = RatingEvent.from_json(json.loads(line))
                except (json.JSONDecodeError, KeyError) as exc:
                    raise CorruptionError(
                        f"{self.log_path}: bad log line {line_no}: {exc}"
                    ) from exc
                self._apply(event)

    def _apply(self, event: RatingEvent) -> None:
        self._events.append(event)
        self._by_worker.setdefault(event.worker_id, {})[event.image_id] = event
        self._last_rating[event.worker_id] = event
        n, sv, sa = self._sums.get(event.image_id, (0, 0, 0))
        self._sums[event.image_id] = (n + 1, sv + event.valence, sa + event.arousal)

    def close(self) -> None:
        with self._lock:
            if self._log_file is not None:
                self._log_file.flush()
                self._log_file.close()
                self._log_file = None

    # -- protocol operations -------------------------------------------------

    def worker_rating_count(self, worker_id: str) -> int:
        return len(self._by_worker.get(worker_id, {}))

    def remaining_quota(self, worker_id: str) -> int:
        return WORKER_QUESTION_CAP - self.worker_rating_count(worker_id)

    def open_session(self, worker_id: str) -> WorkerSession:
        """Seeded permutation of the worker's unrated images, truncated to
        the remaining quota."""
        if not worker_id:
            raise RatingValidationError("worker_id must be a non-empty string")
        with self._lock:
            quota = self.remaining_quota(worker_id)
            if quota <= 0:
                raise QuotaError(
                    f"worker {worker_id!r} already rated "
                    f"{WORKER_QUESTION_CAP} images"
                )
            rated = self._by_worker.get(worker_id, {})
            unrated = [i for i in self.image_ids if i not in rated]
            rng = np.random.default_rng(self._worker_seed(worker_id))
            order = [unrated[i] for i in rng.permutation(len(unrated))][:quota]
            self._session_counter += 1
            session = WorkerSession(
                session_id=f"s{self._session_counter:06d}",
                worker_id=worker_id,
                order=order,
            )
            self._sessions[session.session_id] = session
            return session

    def _worker_seed(self, worker_id: str) -> int:
        digest = hashlib.sha256(
            f"{self.server_seed}:{worker_id}".encode("utf-8")
        ).digest()
        return int.from_bytes(digest[:8], "little")

    def get_session(self, session_id: str) -> WorkerSession:
        session = self._sessions.get(session_id)
        if session is None:
            raise UnknownResourceError(f"no session {session_id!r}")
        return session

    def _advance_past_rated(self, session: WorkerSession) -> None:
        # A stale session may point at images rated through another session;
        # skip them so every session only ever offers unrated images.
        rated = self._by_worker.get(session.worker_id, {})
        while session.cursor < len(session.order) and (
            session.order[session.cursor] in rated
        ):
            session.cursor += 1

    def next_item(self, session_id: str):
        """(current image id, previous RatingEvent or None); None current
        means the sequence is complete."""
        session = self.get_session(session_id)
        with self._lock:
            self._advance_past_rated(session)
            if session.cursor >= len(session.order):
                return None, self._last_rating.get(session.worker_id)
            return (
                session.order[session.cursor],
                self._last_rating.get(session.worker_id),
            )

    def submit_rating(
        self, session_id: str, image_id: str, valence, arousal
    ) -> RatingEvent:
        """Validate, durably append, then advance the session cursor."""
        session = self.get_session(session_id)
        valence = _validate_rating_value("valence", valence)
        arousal = _validate_rating_value("arousal", arousal)
        with self._lock:
            if image_id in self._by_worker.get(session.worker_id, {}):
                raise ConflictError(
                    f"worker {session.worker_id!r} already rated {image_id!r}"
                )
            self._advance_past_rated(session)
            if session.cursor >= len(session.order):
                raise OrderingError("session sequence is already complete")
            expected = session.order[session.cursor]
            if image_id != expected:
                raise OrderingError(
                    f"expected a rating for {expected!r}, got {image_id!r}"
                )
            event = RatingEvent(
                worker_id=session.worker_id,
                image_id=image_id,
                valence=valence,
                arousal=arousal,
                timestamp=int(time.time()),
            )
            self._append(event)
            self._apply(event)
            session.cursor += 1
            return event

    def _append(self, event: RatingEvent) -> None:
        self._log_file.write(json.dumps(event.to_json(), sort_keys=True) + "\n")
        self._log_file.flush()
        os.fsync(self._log_file.fileno())

    def aggregate(self, image_id: str) -> AggregateLabel:
        if image_id not in self._image_id_set and image_id not in self._sums:
            raise UnknownResourceError(f"unknown image {image_id!r}")
        n, sv, sa = self._sums.get(image_id, (0, 0, 0))
        return AggregateLabel(
            image_id=image_id,
            n_ratings=n,
            valence_mean=sv / n if n else None,
            arousal_mean=sa / n if n else None,
        )

    def aggregates(self) -> list[AggregateLabel]:
        """Aggregates for every image with at least one rating, id order."""
        return [self.aggregate(image_id) for image_id in sorted(self._sums)]

    def export_labels(self, manifest_path, out_path=None) -> list[str]:
        """Write finalized aggregate means onto matching manifest records.

        Unfinalized images leave their records untouched. Returns the ids of
        finalized aggregates that matched no record.
        """
        records = pipeline.read_manifest(manifest_path)
        finalized = {
            agg.image_id: pipeline.VaLabel(
                valence=agg.valence_mean, arousal=agg.arousal_mean
            )
            for agg in self.aggregates()
            if agg.finalized
        }
        known = {record.id for record in records}
        updated = pipeline.attach_labels(records, finalized)
        pipeline.write_manifest(updated, out_path or manifest_path)
        return sorted(set(finalized) - known)


# -- HTTP layer ---------------------------------------------------------------


def discover_images(image_root) -> dict[str, Path]:
    """Map image ids (file stems) to paths for PNG/JPEG files in a directory."""
    root = Path(image_root)
    if not root.is_dir():
        raise FileNotFoundError(f"image root {root} is not a directory")
    mapping: dict[str, Path] = {}
    for path in sorted(root.iterdir()):
        if path.suffix.lower() in (".png", ".jpg", ".jpeg") and path.is_file():
            if path.stem in mapping:
                raise ValueError(f"duplicate image id {path.stem!r} in {root}")
            mapping[path.stem] = path
    return mapping


def make_app(store: AnnotationStore, image_paths: dict[str, Path], ui_dir=None):
    """Build the FastAPI app over a store and an id -> path image map."""
    from fastapi import FastAPI, Request
    from fastapi.responses import FileResponse, JSONResponse, RedirectResponse, Response
    from fastapi.staticfiles import StaticFiles

    app = FastAPI(title="afva annotation service")
    app.state.store = store

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": message})

    @app.post("/sessions")
    async def open_session(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return error(400, "request body must be JSON")
        worker_id = body.get("worker_id") if isinstance(body, dict) else None
        if not isinstance(worker_id, str) or not worker_id:
            return error(400, "worker_id must be a non-empty string")
        try:
            session = store.open_session(worker_id)
        except QuotaError as exc:
            return error(403, str(exc))
        return JSONResponse(
            status_code=201,
            content={
                "session_id": session.session_id,
                "remaining_quota": len(session.order),
            },
        )

    @app.get("/sessions/{session_id}/next")
    def next_item(session_id: str):
        try:
            current, previous = store.next_item(session_id)
        except UnknownResourceError as exc:
            return error(404, str(exc))
        if current is None:
            return Response(status_code=204)
        previous_payload = None
        if previous is not None:
            previous_payload = {
                "image_id": previous.image_id,
                "image_url": f"/images/{previous.image_id}",
                "valence": previous.valence,
                "arousal": previous.arousal,
            }
        return JSONResponse(
            status_code=200,
            content={
                "image_id": current,
                "image_url": f"/images/{current}",
                "previous": previous_payload,
            },
        )

    @app.post("/sessions/{session_id}/ratings")
    async def submit_rating(session_id: str, request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return error(400, "request body must be JSON")
        if not isinstance(body, dict) or not isinstance(body.get("image_id"), str):
            return error(400, "image_id must be a string")
        try:
            event = store.submit_rating(
                session_id,
                body["image_id"],
                body.get("valence"),
                body.get("arousal"),
            )
        except UnknownResourceError as exc:
            return error(404, str(exc))
        except RatingValidationError as exc:
            return error(400, str(exc))
        except (ConflictError, OrderingError) as exc:
            return error(409, str(exc))
        return JSONResponse(status_code=201, content=event.to_json())

    @app.get("/images/{image_id}")
    def get_image(image_id: str):
        path = image_paths.get(image_id)
        if path is None:
            return error(404, f"unknown image {image_id!r}")
        media = "image/png" if path.suffix.lower() == ".png" else "image/jpeg"
        return FileResponse(path, media_type=media)

    @app.get("/aggregates")
    def aggregates():
        return JSONResponse(
            status_code=200,
            content=[agg.to_json() for agg in store.aggregates()],
        )

    if ui_dir is not None:
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

        @app.get("/")
        def index():
            return RedirectResponse(url="/ui/")

    return app
