"""Read-only HTTP service over a root directory of preview bundles.

The service never mutates bundles; every response is immutable and
carries a strong validator (the artifact's recorded sha256), so clients
and proxies can cache atlases indefinitely.  Bundles that fail to parse
are excluded from the listing with a logged diagnostic rather than
breaking the portal.
"""
from __future__ import annotations

import json
import logging
from importlib import resources
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse

from .errors import CTPrevError
from .pipeline import INTERACTIVE_SCHEMES, read_meta

__all__ = ["create_app", "bundle_index", "run_server"]

log = logging.getLogger("ctprev.service")

_CACHE_FOREVER = "public, max-age=31536000, immutable"


def bundle_index(root: Path) -> dict[str, dict]:
    """Scan the root for readable bundles; skip and log anything broken."""
    index: dict[str, dict] = {}
    if not root.is_dir():
        return index
    for entry in sorted(root.iterdir()):
        if not entry.is_dir() or entry.name.startswith("."):
            continue
        try:
            meta = read_meta(entry)
        except CTPrevError as exc:
            log.warning("excluding bundle %s: %s", entry.name, exc)
            continue
        if meta["id"] != entry.name:
            log.warning(
                "excluding bundle %s: meta id %r does not match directory",
                entry.name,
                meta["id"],
            )
            continue
        index[meta["id"]] = meta
    return index


def _artifact_etag(meta: dict, rel: str) -> str | None:
    sha = meta.get("checksums", {}).get(rel)
    return f'"{sha}"' if sha else None


def _file_response(request: Request, bundle: Path, meta: dict, rel: str) -> Response:
    path = bundle / rel
    if not path.is_file():
        raise HTTPException(status_code=404, detail=f"no artifact {rel}")
    headers = {"Cache-Control": _CACHE_FOREVER}
    etag = _artifact_etag(meta, rel)
    if etag:
        headers["ETag"] = etag
        if request.headers.get("if-none-match") == etag:
            return Response(status_code=304, headers=headers)
    media = "image/png" if rel.endswith(".png") else "application/json"
    return FileResponse(path, media_type=media, headers=headers)


def _load_json(path: Path) -> dict | None:
    try:
        return json.loads(path.read_text())
    except (OSError, json.JSONDecodeError):
        return None


def create_app(root: str | Path, static_dir: str | Path | None = None) -> FastAPI:
    """Build the FastAPI app serving bundles under ``root``.

    ``static_dir`` overrides the built-in landing page, e.g. to serve a
    compiled viewer; its ``index.html`` is returned at ``/``.
    """
    root = Path(root)
    app = FastAPI(title="ctprev", docs_url=None, redoc_url=None)
    app.state.root = root
    app.state.static_dir = Path(static_dir) if static_dir is not None else None
    app.state.access_log = []

    @app.middleware("http")
    async def _record_access(request: Request, call_next):
        response = await call_next(request)
        entries = app.state.access_log
        entries.append((request.method, request.url.path, response.status_code))
        if len(entries) > 1000:
            del entries[: len(entries) - 1000]
        return response

    def _index() -> dict[str, dict]:
        # re-scanned per request: bundles are immutable once written, and
        # new ones should appear without a restart
        return bundle_index(root)

    def _get(dataset_id: str) -> dict:
        meta = _index().get(dataset_id)
        if meta is None:
            raise HTTPException(status_code=404, detail=f"no dataset {dataset_id!r}")
        return meta

    @app.get("/api/datasets")
    def list_datasets() -> JSONResponse:
        rows = []
        for meta in _index().values():
            has_thumb = "list" in meta.get("previews", {})
            rows.append(
                {
                    "id": meta["id"],
                    "name": meta["name"],
                    "dims": meta["dims"],
                    "thumbnail_url": (
                        f"/api/datasets/{meta['id']}/thumbnail.png" if has_thumb else None
                    ),
                }
            )
        return JSONResponse(rows)

    @app.get("/api/datasets/{dataset_id}")
    def dataset_manifest(dataset_id: str) -> JSONResponse:
        meta = _get(dataset_id)
        bundle = root / dataset_id
        out = dict(meta)
        out["thumbnail_url"] = (
            f"/api/datasets/{dataset_id}/thumbnail.png"
            if "list" in meta.get("previews", {})
            else None
        )
        out["sidecar"] = _load_json(bundle / "thumbnail.json")
        out["data"] = _load_json(bundle / "data" / "manifest.json")
        interactive = _load_json(bundle / "interactive" / "manifest.json")
        if interactive is not None:
            detail = {}
            for s in interactive.get("schemes", INTERACTIVE_SCHEMES):
                sch = _load_json(bundle / "interactive" / str(s) / "manifest.json")
                if sch is not None:
                    detail[str(s)] = sch
            interactive["schemes_detail"] = detail
        out["interactive"] = interactive
        return JSONResponse(out)

    @app.get("/api/datasets/{dataset_id}/thumbnail.png")
    def thumbnail(dataset_id: str, request: Request) -> Response:
        meta = _get(dataset_id)
        return _file_response(request, root / dataset_id, meta, "thumbnail.png")

    @app.get("/api/datasets/{dataset_id}/data/{atlas}.png")
    def data_atlas(dataset_id: str, atlas: str, request: Request) -> Response:
        meta = _get(dataset_id)
        _check_atlas_name(atlas)
        return _file_response(request, root / dataset_id, meta, f"data/{atlas}.png")

    @app.get("/api/datasets/{dataset_id}/data/manifest.json")
    def data_manifest(dataset_id: str, request: Request) -> Response:
        meta = _get(dataset_id)
        return _file_response(request, root / dataset_id, meta, "data/manifest.json")

    @app.get("/api/datasets/{dataset_id}/interactive/{scheme}/{atlas}.png")
    def interactive_atlas(
        dataset_id: str, scheme: int, atlas: str, request: Request
    ) -> Response:
        meta = _get(dataset_id)
        if scheme not in INTERACTIVE_SCHEMES:
            raise HTTPException(status_code=404, detail=f"no scheme {scheme}")
        _check_atlas_name(atlas)
        rel = f"interactive/{scheme}/{atlas}.png"
        return _file_response(request, root / dataset_id, meta, rel)

    @app.get("/api/_log")
    def access_log() -> JSONResponse:
        return JSONResponse(
            [{"method": m, "path": p, "status": s} for m, p, s in app.state.access_log]
        )

    @app.get("/")
    def home() -> Response:
        if app.state.static_dir is not None:
            index = app.state.static_dir / "index.html"
            if index.is_file():
                return FileResponse(index, media_type="text/html")
        page = resources.files("ctprev").joinpath("static/index.html")
        return HTMLResponse(page.read_text())

    @app.get("/static/{asset}")
    def static_asset(asset: str) -> Response:
        _check_asset_name(asset)
        if app.state.static_dir is not None:
            path = app.state.static_dir / asset
            if path.is_file():
                return FileResponse(path)
        raise HTTPException(status_code=404, detail=f"no asset {asset!r}")

    return app


def _check_atlas_name(atlas: str) -> None:
    # route params never contain '/', but keep names to the sm_ pattern
    parts = atlas.split("_")
    ok = (
        len(parts) == 3
        and parts[0] == "sm"
        and parts[1].isdigit()
        and parts[2].isdigit()
    )
    if not ok:
        raise HTTPException(status_code=404, detail=f"no atlas {atlas!r}")


def _check_asset_name(asset: str) -> None:
    if "/" in asset or "\\" in asset or asset.startswith("."):
        raise HTTPException(status_code=404, detail=f"no asset {asset!r}")


def run_server(root: str | Path, port: int = 8080, host: str = "127.0.0.1",
               static_dir: str | Path | None = None) -> None:
    """Blocking uvicorn server over ``create_app``."""
    import uvicorn

    uvicorn.run(create_app(root, static_dir), host=host, port=port, log_level="info")
