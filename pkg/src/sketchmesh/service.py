"""Editing sessions over HTTP.

A session holds one mesh, one camera, and the sketch derived from them.
Edits arrive as a PNG sketch with red strokes: on background they mean
"add what I drew", on existing strokes they mean "erase this". Every
mutation is computed on the side and committed only if it succeeds, so
a rejected or failed request leaves the session byte-identical. Undo
restores the previous mesh; the sketch is always re-synthesised from
the current mesh, never patched.

State persists per session as a directory (state.json, mesh.obj,
sketch.png), each file written to a temp name and renamed, so a crash
never leaves a torn session on disk.
"""

from __future__ import annotations

import base64
import json
import os
import tempfile
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol

from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel

from .codec import TokenSequence, detokenize, fragment_sequence, tokenize
from .deletion import apply_deletion, geometric_labels
from .errors import ObjParseError, SketchMeshError
from .generate import (
    CountingModel,
    CountingSpeculator,
    DecodeConfig,
    generate_addition,
    validate_fragment,
)
from .mesh import DEFAULT_BINS, QuantizedMesh, merge, quantize, normalize_to_unit_cube
from .obj_io import dumps_obj, loads_obj
from .render import CameraPose
from .sketch import SketchImage, from_png_bytes, synth_sketch, to_png_bytes

HISTORY_LIMIT = 32


class AdditionBackend(Protocol):
    name: str

    def propose(
        self,
        prompt: TokenSequence,
        sketch: SketchImage,
        config: DecodeConfig,
    ) -> tuple[int, ...]:
        """Continuation tokens for the prompt (should end with End)."""
        ...


class OracleAdditionBackend:
    """Always proposes one fixed mesh; used for tests and demos."""

    name = "oracle"

    def __init__(self, addition: QuantizedMesh):
        self.addition = addition

    def propose(self, prompt, sketch, config):
        if prompt.bins != self.addition.bins:
            raise SketchMeshError("oracle addition grid does not match session")
        return tokenize(self.addition).tokens[1:]


class CountingAdditionBackend:
    """Decodes a continuation from fitted count tables."""

    name = "counting"

    def __init__(
        self,
        model: CountingModel,
        speculator: Optional[CountingSpeculator] = None,
    ):
        self.model = model
        self.speculator = speculator

    def propose(self, prompt, sketch, config):
        fragment, _ = generate_addition(
            self.model,
            prompt,
            speculator=self.speculator,
            condition=sketch,
            config=config,
        )
        return fragment


@dataclass
class Session:
    id: str
    mesh: QuantizedMesh
    camera: CameraPose
    sketch: SketchImage
    history: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class SessionStore:
    """In-memory sessions with optional directory persistence."""

    def __init__(self, root: Optional[Path] = None):
        self.root = Path(root) if root is not None else None
        self.sessions: dict[str, Session] = {}
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)
            self._recover()

    def _recover(self) -> None:
        for state_path in sorted(self.root.glob("*/state.json")):
            try:
                doc = json.loads(state_path.read_text(encoding="utf-8"))
                mesh_text = (state_path.parent / "mesh.obj").read_text(
                    encoding="utf-8"
                )
                bins = int(doc["bins"])
                mesh = quantize(loads_obj(mesh_text), bins)
                camera = CameraPose.from_json(doc["camera"])
                session = Session(
                    id=doc["id"],
                    mesh=mesh,
                    camera=camera,
                    sketch=synth_sketch(mesh, None, camera),
                    history=list(doc.get("history", [])),
                )
            except Exception:
                continue  # skip unreadable sessions rather than fail startup
            self.sessions[session.id] = session

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="no such session")
        return session

    def add(self, session: Session) -> None:
        self.sessions[session.id] = session
        self.persist(session)

    def persist(self, session: Session) -> None:
        if self.root is None:
            return
        target = self.root / session.id
        target.mkdir(parents=True, exist_ok=True)
        _atomic_write(target / "mesh.obj", dumps_obj(session.mesh).encode("utf-8"))
        _atomic_write(target / "sketch.png", to_png_bytes(session.sketch))
        state = {
            "id": session.id,
            "bins": session.mesh.bins,
            "camera": session.camera.to_json(),
            "history": session.history,
        }
        _atomic_write(
            target / "state.json",
            (json.dumps(state, sort_keys=True) + "\n").encode("utf-8"),
        )


def _atomic_write(path: Path, blob: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class CreateSessionRequest(BaseModel):
    obj: Optional[str] = None
    bins: int = DEFAULT_BINS
    azimuth: float = 30.0
    elevation: float = 30.0
    image_size: int = 512


class EditRequest(BaseModel):
    kind: str  # "add" | "delete"
    sketch_png_base64: str


def _session_doc(session: Session) -> dict:
    return {
        "id": session.id,
        "bins": session.mesh.bins,
        "faces": session.mesh.face_count,
        "camera": session.camera.to_json(),
        "history": len(session.history),
    }


def create_app(
    store: SessionStore,
    backend: AdditionBackend,
    decode: DecodeConfig = DecodeConfig(temperature=0.5),
) -> FastAPI:
    app = FastAPI(title="sketchmesh")

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest):
        if req.obj:
            try:
                real = loads_obj(req.obj)
            except ObjParseError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            if real.face_count:
                mesh = quantize(normalize_to_unit_cube(real), req.bins)
            else:
                mesh = QuantizedMesh(frozenset(), req.bins)
        else:
            mesh = QuantizedMesh(frozenset(), req.bins)
        camera = CameraPose(
            azimuth=req.azimuth, elevation=req.elevation, size=req.image_size
        )
        session = Session(
            id=uuid.uuid4().hex,
            mesh=mesh,
            camera=camera,
            sketch=synth_sketch(mesh, None, camera),
        )
        store.add(session)
        return _session_doc(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_doc(store.get(session_id))

    @app.get("/sessions/{session_id}/mesh.obj")
    def get_mesh(session_id: str):
        session = store.get(session_id)
        return Response(
            content=dumps_obj(session.mesh), media_type="text/plain"
        )

    @app.get("/sessions/{session_id}/sketch.png")
    def get_sketch(session_id: str):
        session = store.get(session_id)
        return Response(
            content=to_png_bytes(session.sketch), media_type="image/png"
        )

    @app.post("/sessions/{session_id}/edits")
    def apply_edit(session_id: str, req: EditRequest):
        session = store.get(session_id)
        if req.kind not in ("add", "delete"):
            raise HTTPException(status_code=422, detail="kind must be add or delete")
        try:
            incoming = from_png_bytes(base64.b64decode(req.sketch_png_base64))
        except Exception:
            raise HTTPException(status_code=400, detail="sketch is not a valid sketch PNG")
        with session.lock:
            if incoming.size != session.sketch.size:
                raise HTTPException(status_code=422, detail="sketch size mismatch")
            edit = incoming.edit_mask
            if not edit.any():
                raise HTTPException(status_code=422, detail="no edit strokes in sketch")
            current = session.sketch.strokes
            if req.kind == "add":
                if (edit & current).any():
                    raise HTTPException(
                        status_code=422,
                        detail="addition strokes must not overlap existing strokes",
                    )
                new_mesh, extra = _run_addition(session, incoming, backend, decode)
            else:
                if (edit & ~current).any():
                    raise HTTPException(
                        status_code=422,
                        detail="deletion strokes must lie on existing strokes",
                    )
                new_mesh, extra = _run_deletion(session, edit)
            # Commit point: everything below must not fail validation.
            snapshot = {"kind": req.kind, "obj": dumps_obj(session.mesh)}
            session.history.append(snapshot)
            del session.history[:-HISTORY_LIMIT]
            session.mesh = new_mesh
            session.sketch = synth_sketch(new_mesh, None, session.camera)
            store.persist(session)
            doc = _session_doc(session)
            doc.update(extra)
            return doc

    @app.post("/sessions/{session_id}/undo")
    def undo(session_id: str):
        session = store.get(session_id)
        with session.lock:
            if not session.history:
                raise HTTPException(status_code=409, detail="nothing to undo")
            snapshot = session.history.pop()
            mesh = quantize(loads_obj(snapshot["obj"]), session.mesh.bins)
            session.mesh = mesh
            session.sketch = synth_sketch(mesh, None, session.camera)
            store.persist(session)
            return _session_doc(session)

    return app


def _run_addition(session, incoming, backend, decode):
    prompt = tokenize(session.mesh)
    try:
        fragment = backend.propose(prompt, incoming, decode)
    except SketchMeshError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    valid = validate_fragment(fragment, session.mesh.bins)
    if not valid:
        raise HTTPException(status_code=422, detail="model produced an invalid sequence")
    addition = detokenize(fragment_sequence(fragment, session.mesh.bins))
    if addition.face_count == 0:
        raise HTTPException(status_code=422, detail="model proposed no triangles")
    new_mesh = merge(session.mesh, addition)
    return new_mesh, {"added_faces": addition.face_count}


def _run_deletion(session, erased):
    labels = geometric_labels(
        session.mesh, erased, session.camera, depth_test=False
    )
    removed, kept = apply_deletion(session.mesh, labels)
    if removed.face_count == 0:
        raise HTTPException(status_code=422, detail="strokes select nothing to delete")
    return kept, {"removed_faces": removed.face_count}
