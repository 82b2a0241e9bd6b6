"""Command-line front end.

Subcommands mirror the library surface: ``ingest``/``build``/``serve``
drive bundles end to end, while ``threshold``, ``mask`` and ``render``
expose the individual analysis steps for one volume.  Volume arguments
take the JSON header written by ``save_volume`` (or by ``ingest``).
``CTPREV_ROOT`` and ``CTPREV_PORT`` provide defaults for ``--root`` and
``--port``.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .errors import CTPrevError
from .mask import artifact_bins, detect_container_circle, filter_histogram_bins
from .pipeline import build_bundle, ingest_stack, verify_bundle
from .render import ViewParams, optimal_snapshot
from .threshold import its_threshold, otsu_threshold
from .volume import load_volume, save_volume, volume_histogram

__all__ = ["main"]


def _env_root(value: str | None) -> Path:
    root = value or os.environ.get("CTPREV_ROOT")
    if not root:
        raise SystemExit("no bundle root: pass --root or set CTPREV_ROOT")
    return Path(root)


def _print_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _cmd_ingest(args: argparse.Namespace) -> int:
    meta = ingest_stack(args.manifest, _env_root(args.out), dataset_id=args.id)
    _print_json(
        {
            "id": meta.dataset_id,
            "name": meta.name,
            "dims": list(meta.dims),
            "raw_bytes": meta.raw_bytes,
        }
    )
    return 0


def _cmd_build(args: argparse.Namespace) -> int:
    previews = (
        ("list", "data", "interactive") if args.preview == "all" else (args.preview,)
    )
    meta = build_bundle(
        _env_root(args.root),
        args.id,
        previews=previews,
        n_views=args.views,
        full_res=args.full_res,
    )
    _print_json({"id": meta["id"], "previews": sorted(meta["previews"])})
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    problems = verify_bundle(_env_root(args.root) / args.id)
    _print_json({"id": args.id, "problems": problems})
    return 0 if not problems else 1


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import run_server

    port = args.port if args.port is not None else int(os.environ.get("CTPREV_PORT", "8080"))
    run_server(_env_root(args.root), port=port, host=args.host, static_dir=args.static)
    return 0


def _cmd_threshold(args: argparse.Namespace) -> int:
    hist = volume_histogram(load_volume(args.volume))
    if args.method == "otsu":
        result = otsu_threshold(hist)
    else:
        result = its_threshold(hist, t_start=args.start)
    _print_json({"value": result.value, "iterations": result.iterations})
    return 0


def _cmd_mask_container(args: argparse.Namespace) -> int:
    volume = load_volume(args.volume)
    circle = detect_container_circle(
        volume.top_slice(), edge_threshold=args.edge_threshold
    )
    _print_json(
        {"cx": circle.cx, "cy": circle.cy, "r": circle.r, "votes": circle.votes}
    )
    return 0


def _cmd_mask_histfilter(args: argparse.Namespace) -> int:
    volume = load_volume(args.volume)
    bins = artifact_bins(volume, n_top=args.top, frac=args.frac)
    filtered = filter_histogram_bins(volume, bins)
    out = Path(args.out) if args.out else Path(args.volume).parent
    raw_path, _ = save_volume(filtered, out, args.name)
    _print_json({"bins": sorted(bins), "volume": str(raw_path)})
    return 0


def _cmd_render_snapshot(args: argparse.Namespace) -> int:
    from PIL import Image

    volume = load_volume(args.volume)
    if args.threshold == "auto":
        threshold = otsu_threshold(volume_histogram(volume)).value
    else:
        threshold = int(args.threshold)
    params = ViewParams(mode=args.mode, threshold=threshold)
    snap = optimal_snapshot(volume, n_views=args.views, params=params)
    out = Path(args.out)
    Image.fromarray(snap.image, mode="L").save(out)
    _print_json({"azimuth": snap.azimuth_deg, "entropy": snap.entropy})
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctprev", description="build and serve visual previews of CT volumes"
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a slice stack into a bundle root")
    p.add_argument("manifest", help="slice-stack manifest JSON")
    p.add_argument("--out", help="bundle root (default $CTPREV_ROOT)")
    p.add_argument("--id", help="dataset id (default: slug of the stack name)")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("build", help="build previews for an ingested dataset")
    p.add_argument("id", help="dataset id under the bundle root")
    p.add_argument(
        "--preview",
        choices=("list", "data", "interactive", "all"),
        default="all",
    )
    p.add_argument("--root", help="bundle root (default $CTPREV_ROOT)")
    p.add_argument("--views", type=int, default=36, help="snapshot azimuth count")
    p.add_argument(
        "--full-res",
        action="store_true",
        help="render the thumbnail from the raw volume instead of a 256 working copy",
    )
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("verify", help="check a bundle against its checksums")
    p.add_argument("id")
    p.add_argument("--root", help="bundle root (default $CTPREV_ROOT)")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("serve", help="serve bundles over HTTP")
    p.add_argument("--root", help="bundle root (default $CTPREV_ROOT)")
    p.add_argument("--port", type=int, default=None, help="default $CTPREV_PORT or 8080")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static", help="directory with a viewer to serve at /")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("threshold", help="compute a global threshold for a volume")
    p.add_argument("volume", help="volume header JSON")
    p.add_argument("--method", choices=("otsu", "its"), default="otsu")
    p.add_argument("--start", type=int, default=128, help="ITS starting threshold")
    p.set_defaults(func=_cmd_threshold)

    p = sub.add_parser("mask", help="container detection and histogram filtering")
    msub = p.add_subparsers(dest="mask_command", required=True)
    m = msub.add_parser("container", help="detect the container circle")
    m.add_argument("volume", help="volume header JSON")
    m.add_argument("--edge-threshold", type=float, default=96.0)
    m.set_defaults(func=_cmd_mask_container)
    m = msub.add_parser("histfilter", help="zero artifact histogram bins")
    m.add_argument("volume", help="volume header JSON")
    m.add_argument("--top", type=int, default=3, help="top slices to scan")
    m.add_argument("--frac", type=float, default=0.0005, help="bin population cutoff")
    m.add_argument("--out", help="output directory (default: next to the input)")
    m.add_argument("--name", default="filtered", help="output volume name")
    m.set_defaults(func=_cmd_mask_histfilter)

    p = sub.add_parser("render", help="server-side rendering")
    rsub = p.add_subparsers(dest="render_command", required=True)
    r = rsub.add_parser("snapshot", help="write the highest-entropy view")
    r.add_argument("volume", help="volume header JSON")
    r.add_argument("--views", type=int, default=36)
    r.add_argument("--mode", choices=("surface", "additive"), default="surface")
    r.add_argument("--threshold", default="auto", help="iso threshold or 'auto'")
    r.add_argument("--out", default="thumbnail.png")
    r.set_defaults(func=_cmd_render_snapshot)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except CTPrevError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
