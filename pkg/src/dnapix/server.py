"""HTTP service over one oligo pool.

Session state is in memory only: per-image decode caches and cumulative
cost reports reset when the process restarts. Decodes for one image are
serialized; reads for other images never wait on them.
"""

from __future__ import annotations

import math
import threading
from collections import defaultdict

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, ConfigDict, Field

from .channel import ZERO_RATES, ErrorRates, sequence
from .errors import DnapixError, LayerRecoveryError
from .image import psnr, upsample_bicubic, write_bmp
from .pipeline import DEFAULT_AMPLIFICATION, ProgressiveDecoder
from .pool import OligoPool, pcr_select
from .primers import DEFAULT_TAU
from .reconstruct import extract_thumbnails


class RatesBody(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    sub: float = 0.0
    ins: float = 0.0
    dele: float = Field(0.0, alias="del")


class DecodeBody(BaseModel):
    targetLevel: int
    coverage: float = 1.0
    rates: RatesBody = RatesBody()
    seed: int = 0
    mode: str = "poisson"


def create_app(pool: OligoPool, tau: int = DEFAULT_TAU,
               amplification: int = DEFAULT_AMPLIFICATION) -> FastAPI:
    app = FastAPI(title="dnapix")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    registry = pool.registry
    decoder = ProgressiveDecoder(pool, tau=tau, amplification=amplification)
    locks: dict[int, threading.Lock] = defaultdict(threading.Lock)
    thumb_lock = threading.Lock()
    thumbnails: dict[int, object] = {}
    decoded: dict[tuple[int, int], bytes] = {}
    references: dict[int, object] = {}
    reports: dict[int, dict] = {}

    @app.exception_handler(HTTPException)
    async def _http_error(request, exc: HTTPException):
        detail = exc.detail
        if not isinstance(detail, dict):
            detail = {"code": "error", "message": str(detail)}
        return JSONResponse(detail, status_code=exc.status_code)

    def _check_image(image_id: int) -> None:
        if image_id not in pool.image_ids:
            raise HTTPException(
                404, {"code": "unknown-image", "message": f"no image {image_id} in pool"}
            )

    def _ensure_thumbnails() -> None:
        with thumb_lock:
            if thumbnails:
                return
            selection = pcr_select(pool, [registry.layer_pairs[0]], tau=0)
            readset = sequence(selection, 1.0, ZERO_RATES, 0, "exact")
            results, _ = extract_thumbnails(readset, registry, tau)
            for r in results:
                thumbnails[r.image_id] = r.image

    def _reference(image_id: int):
        """Full-resolution reconstruction used only for PSNR reporting.

        Recovered noiselessly through a private decoder so it never touches
        the session's cumulative read cost.
        """
        with thumb_lock:
            ref = references.get(image_id)
        if ref is not None:
            return ref
        private = ProgressiveDecoder(pool, tau=tau, amplification=1)
        pair = registry.image_pairs[image_id]
        result = private.decode(pair, pool.num_levels - 1, 1.0, ZERO_RATES, 0, "exact")
        with thumb_lock:
            references[image_id] = result.image
        return result.image

    @app.get("/api/images")
    def list_images():
        _ensure_thumbnails()
        return [
            {
                "imageId": i,
                "thumbnailUrl": f"/api/images/{i}/thumbnail.bmp",
                "primerPairId": i,
            }
            for i in pool.image_ids
        ]

    @app.get("/api/images/{image_id}/thumbnail.bmp")
    def thumbnail_bmp(image_id: int):
        _check_image(image_id)
        _ensure_thumbnails()
        img = thumbnails.get(image_id)
        if img is None:
            raise HTTPException(
                422, {"code": "thumbnail-failed", "message": f"thumbnail {image_id} undecodable"}
            )
        return Response(write_bmp(img), media_type="image/bmp")

    @app.post("/api/images/{image_id}/decode")
    def decode(image_id: int, body: DecodeBody):
        _check_image(image_id)
        try:
            rates = ErrorRates(sub=body.rates.sub, ins=body.rates.ins, dele=body.rates.dele)
        except DnapixError as exc:
            raise HTTPException(422, {"code": "bad-rates", "message": str(exc)})
        if not 0 <= body.targetLevel < pool.num_levels:
            raise HTTPException(
                422,
                {"code": "bad-level", "message": f"targetLevel must be in [0, {pool.num_levels - 1}]"},
            )
        pair = registry.image_pairs[image_id]
        with locks[image_id]:
            try:
                result = decoder.decode(
                    pair, body.targetLevel, body.coverage, rates, body.seed, body.mode
                )
            except LayerRecoveryError as exc:
                raise HTTPException(
                    422,
                    {"code": "layer-recovery", "message": str(exc), "layer": exc.layer},
                )
            except DnapixError as exc:
                raise HTTPException(422, {"code": "decode-failed", "message": str(exc)})
            width, height, _ = pool.image_dims[image_id]
            shown = upsample_bicubic(result.image, width, height)
            decoded[(image_id, body.targetLevel)] = write_bmp(shown)
            value = psnr(shown, _reference(image_id))
            newly = set(result.sequenced_layers)
            report = result.report.to_dict()
            response = {
                "imageUrl": f"/api/images/{image_id}/image.bmp?level={body.targetLevel}",
                "psnr": None if math.isinf(value) else value,
                "layerCosts": [e for e in report["perLayer"] if e["layer"] in newly],
                "cumulativeReadCost": report["cumulativeReadCost"],
                "gains": {"pd": result.gains[0], "ra": result.gains[1]},
            }
            reports[image_id] = report
        return response

    @app.get("/api/images/{image_id}/image.bmp")
    def image_bmp(image_id: int, level: int = 0):
        _check_image(image_id)
        body = decoded.get((image_id, level))
        if body is None:
            raise HTTPException(
                404,
                {"code": "not-decoded", "message": f"image {image_id} level {level} not decoded yet"},
            )
        return Response(body, media_type="image/bmp")

    @app.get("/api/cost-report")
    def cost_report():
        return {"images": [reports[i] for i in sorted(reports)]}

    return app
