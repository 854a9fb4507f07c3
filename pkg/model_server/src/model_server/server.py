"""HTTP serving.

Wire protocol:
    GET  /health                          -> 200
    POST /generate   {"input", "max_new_tokens", "params"} -> {"output"}
    POST /tokenize   {"text"}             -> {"ids"}
    POST /detokenize {"ids"}              -> {"text"}   (convenience)

Generation is greedy and deterministic for a fixed checkpoint; decoding
knobs arrive via "params" and are passed through verbatim.
"""

from __future__ import annotations

import logging
import threading

import uvicorn
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from model_server.checkpoint import load_checkpoint
from model_server.train import greedy_predict

log = logging.getLogger(__name__)

GENERATION_PARAM_KEYS = ("num_beams", "do_sample", "temperature", "top_p")


class GenerateRequest(BaseModel):
    input: str
    max_new_tokens: int = Field(default=64, ge=1, le=1024)
    params: dict = Field(default_factory=dict)


class TokenizeRequest(BaseModel):
    text: str


class DetokenizeRequest(BaseModel):
    ids: list[int]


def create_app(checkpoint: str) -> FastAPI:
    model, tokenizer = load_checkpoint(checkpoint)
    app = FastAPI(title="sequence model server")
    lock = threading.Lock()  # generation mutates no state but is CPU-bound

    @app.exception_handler(RequestValidationError)
    def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "checkpoint": checkpoint}

    @app.post("/generate")
    def generate(request: GenerateRequest):
        overrides = {
            k: v for k, v in request.params.items()
            if k in GENERATION_PARAM_KEYS
        }
        if overrides:
            log.debug("pass-through generation params: %s", overrides)
        with lock:
            try:
                output = greedy_predict(
                    model, tokenizer, [request.input],
                    max_new_tokens=request.max_new_tokens,
                )[0]
            except Exception as exc:
                raise HTTPException(status_code=500, detail=str(exc)) from exc
        return {"output": output}

    @app.post("/tokenize")
    def tokenize(request: TokenizeRequest):
        return {"ids": tokenizer(request.text)["input_ids"]}

    @app.post("/detokenize")
    def detokenize(request: DetokenizeRequest):
        return {"text": tokenizer.decode(request.ids, skip_special_tokens=False)}

    return app


def serve(checkpoint: str, port: int, host: str = "127.0.0.1") -> None:
    uvicorn.run(create_app(checkpoint), host=host, port=port, log_level="warning")


class BackgroundServer:
    """In-process server for tests and scripted runs."""

    def __init__(self, checkpoint: str, port: int, host: str = "127.0.0.1"):
        config = uvicorn.Config(
            create_app(checkpoint), host=host, port=port, log_level="warning"
        )
        self._server = uvicorn.Server(config)
        self._thread = threading.Thread(target=self._server.run, daemon=True)
        self.url = f"http://{host}:{port}"

    def __enter__(self):
        import time

        self._thread.start()
        deadline = time.time() + 30
        while not self._server.started:
            if time.time() > deadline:
                raise RuntimeError("server did not start in time")
            time.sleep(0.05)
        return self

    def __exit__(self, *exc):
        self._server.should_exit = True
        self._thread.join(timeout=10)
        return False
