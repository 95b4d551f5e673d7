"""HTTP backend for the telediagnosis app.

Routes:
    POST /api/diagnose   multipart field "image" -> predicted subtype + probabilities
    GET  /api/health     liveness and whether a model is loaded
    GET  /api/models     registry metadata, best validation accuracy first

The best registered model is loaded once at startup (overridable by id) and
held immutable; per-request preprocessing is the evaluation path (decode ->
pad -> resize -> normalize, no augmentation), so service predictions match
offline evaluation exactly. Error bodies are {"error": code, "message": text}.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from . import pipeline
from .errors import DecodeError, ModelNotFoundError
from .labels import DISPLAY_NAMES
from .registry import Registry

DEFAULT_MAX_UPLOAD_BYTES = 10 * 1024 * 1024

_FALLBACK_PAGE = """<!doctype html>
<html><head><title>hemadx</title></head>
<body><h1>hemadx diagnosis service</h1>
<p>No web UI bundle is installed. The API is available at
<code>POST /api/diagnose</code>, <code>GET /api/health</code>,
and <code>GET /api/models</code>.</p></body></html>
"""


@dataclass(frozen=True)
class DiagnosisResult:
    predicted_label: str
    probabilities: dict[str, float]
    model_id: str
    elapsed_ms: int

    def __post_init__(self) -> None:
        if abs(sum(self.probabilities.values()) - 1.0) > 1e-6:
            raise ValueError("probabilities must sum to 1")
        top = max(self.probabilities, key=self.probabilities.get)
        if self.probabilities[self.predicted_label] != self.probabilities[top]:
            raise ValueError("predicted_label must be the argmax of probabilities")


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code, "message": message})


def create_app(
    registry_dir: str | Path,
    model_id: str | None = None,
    static_dir: str | Path | None = None,
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD_BYTES,
) -> FastAPI:
    registry = Registry(registry_dir)
    loaded = None
    if model_id is not None:
        loaded = registry.load_artifact(model_id)
    else:
        try:
            loaded = registry.load_artifact(registry.best_model())
        except ModelNotFoundError:
            loaded = None

    app = FastAPI(title="hemadx diagnosis service")
    inference_lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request, exc):
        return _error(400, "bad_request", str(exc))

    @app.get("/api/health")
    async def health():
        return {"status": "ok", "model_loaded": loaded is not None}

    @app.get("/api/models")
    async def models():
        metas = sorted(
            registry.list_artifacts(), key=lambda m: (-m.val_accuracy, m.final_val_loss, m.arch_name)
        )
        return [
            {
                "model_id": m.model_id,
                "arch_name": m.arch_name,
                "created_at": m.created_at,
                "val_accuracy": m.val_accuracy,
                "test_accuracy": m.test_accuracy,
                "label_order": list(m.label_order),
            }
            for m in metas
        ]

    @app.post("/api/diagnose")
    async def diagnose(image: UploadFile | None = File(None)):
        if loaded is None:
            return _error(503, "no_model", "no model is loaded; train and register one first")
        if image is None:
            return _error(400, "missing_file", 'multipart field "image" is required')
        data = await image.read(max_upload_bytes + 1)
        if len(data) > max_upload_bytes:
            return _error(413, "payload_too_large", f"upload exceeds {max_upload_bytes} bytes")

        graph, meta = loaded
        started = time.perf_counter()
        try:
            tensor = pipeline.decode(data)
        except DecodeError as exc:
            return _error(400, "undecodable_image", str(exc))
        tensor = pipeline.pad_to_square(tensor)
        tensor = pipeline.resize(tensor, 224, 224)
        tensor = pipeline.normalize(tensor)
        with inference_lock:
            probabilities = graph.forward(tensor.data[np.newaxis])[0]
        elapsed_ms = int((time.perf_counter() - started) * 1000)

        result = DiagnosisResult(
            predicted_label=DISPLAY_NAMES[int(np.argmax(probabilities))],
            probabilities={name: float(p) for name, p in zip(DISPLAY_NAMES, probabilities)},
            model_id=meta.model_id,
            elapsed_ms=elapsed_ms,
        )
        return {
            "predicted_label": result.predicted_label,
            "probabilities": result.probabilities,
            "model_id": result.model_id,
            "elapsed_ms": result.elapsed_ms,
        }

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="webui")
    else:

        @app.get("/", response_class=HTMLResponse)
        async def index():
            return _FALLBACK_PAGE

    return app
