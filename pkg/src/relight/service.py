"""Stateless HTTP service exposing the enhancement pipeline.

Endpoints:
  GET  /health           -> {"status": "ok"}
  GET  /checkpoint-info  -> architecture + parameter counts per network
  POST /enhance          -> run one enhancement

/enhance accepts either multipart/form-data (PNG file parts plus a "payload"
JSON field) or application/json with base64-encoded PNGs.  Responses are JSON
envelopes with base64 PNG images; pass debug=1 (query or payload) to include
the decomposition planes and noise maps.  Checkpoints load once at startup;
requests share them read-only, so identical requests produce identical bytes.
"""
from __future__ import annotations

import base64
import io
import json
import re
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

import numpy as np
from PIL import Image as PILImage

from .image import hard_histogram, validate_image
from .metrics import hist_l1
from .pipeline import (ControlParams, EnhanceRequest, EnhancerNets, enhance,
                       load_enhancer)

DEFAULT_MAX_DIM = 4096

__all__ = ["ServiceConfig", "create_server", "serve"]


@dataclass
class ServiceConfig:
    port: int = 8023
    host: str = "127.0.0.1"
    max_dim: int = DEFAULT_MAX_DIM
    smoothness_weight: float = 0.1
    iterations: int = 50


class RequestError(Exception):
    """Maps to an HTTP status + one-line diagnostic."""

    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _decode_png(raw: bytes, name: str, max_dim: int) -> np.ndarray:
    try:
        with PILImage.open(io.BytesIO(raw)) as im:
            if im.format != "PNG":
                raise RequestError(400, f"{name}: only PNG images are accepted")
            if im.width > max_dim or im.height > max_dim:
                raise RequestError(
                    413, f"{name}: image exceeds {max_dim}x{max_dim} limit")
            if im.mode == "L":
                arr = np.asarray(im, dtype=np.float64) / 255.0
            elif im.mode == "RGB":
                arr = np.asarray(im, dtype=np.float64) / 255.0
            elif im.mode in ("I;16", "I"):
                arr = np.asarray(im, dtype=np.float64) / 65535.0
            else:
                raise RequestError(400, f"{name}: unsupported PNG mode {im.mode}")
    except RequestError:
        raise
    except Exception as exc:
        raise RequestError(400, f"{name}: not a decodable PNG ({exc})") from exc
    return arr


def _encode_png(img: np.ndarray) -> str:
    img = validate_image(img)
    codes = np.rint(img * 255.0).astype(np.uint8)
    mode = "L" if codes.ndim == 2 else "RGB"
    buf = io.BytesIO()
    PILImage.fromarray(codes, mode=mode).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _encode_scaled(plane: np.ndarray) -> dict:
    """Noise maps are tiny; ship them max-scaled with the scale alongside."""
    peak = float(plane.max())
    scaled = plane / peak if peak > 0 else plane
    return {"png": _encode_png(np.clip(scaled, 0, 1)), "max": peak}


def parse_multipart(content_type: str, body: bytes) -> dict[str, list[bytes]]:
    """Minimal multipart/form-data parser: field name -> list of payloads."""
    m = re.search(r'boundary="?([^";]+)"?', content_type)
    if not m:
        raise RequestError(400, "multipart body without a boundary")
    boundary = b"--" + m.group(1).encode("ascii")
    fields: dict[str, list[bytes]] = {}
    for part in body.split(boundary)[1:]:
        if part in (b"--\r\n", b"--", b"") or part.startswith(b"--\r"):
            continue
        part = part.lstrip(b"\r\n")
        header_end = part.find(b"\r\n\r\n")
        if header_end < 0:
            raise RequestError(400, "malformed multipart part")
        headers = part[:header_end].decode("utf-8", errors="replace")
        payload = part[header_end + 4:]
        if payload.endswith(b"\r\n"):
            payload = payload[:-2]
        nm = re.search(r'name="([^"]*)"', headers)
        if not nm:
            raise RequestError(400, "multipart part without a field name")
        fields.setdefault(nm.group(1), []).append(payload)
    if not fields:
        raise RequestError(400, "empty multipart body")
    return fields


def _params_from_payload(payload: dict) -> ControlParams:
    missing = [k for k in ("gamma", "c_h", "c_s", "c_n") if k not in payload]
    if missing:
        raise RequestError(400, f"parameters mode missing {', '.join(missing)}")
    try:
        return ControlParams(gamma=float(payload["gamma"]),
                             c_h=float(payload["c_h"]),
                             c_s=float(payload["c_s"]),
                             c_n=float(payload["c_n"]))
    except (TypeError, ValueError) as exc:
        raise RequestError(400, f"bad control parameters: {exc}") from exc


def build_request(content_type: str, body: bytes, max_dim: int,
                  ) -> tuple[EnhanceRequest, bool]:
    """Turn an HTTP body (multipart or JSON) into a validated EnhanceRequest."""
    if content_type.startswith("multipart/form-data"):
        fields = parse_multipart(content_type, body)
        try:
            payload = json.loads(fields["payload"][0]) if "payload" in fields else {}
        except json.JSONDecodeError as exc:
            raise RequestError(400, f"payload field is not valid JSON: {exc}")
        images = {k: v for k, v in fields.items() if k != "payload"}
        get_img = lambda key: (_decode_png(images[key][0], key, max_dim)
                               if key in images else None)
        refs = [_decode_png(raw, "ref", max_dim) for raw in images.get("ref", [])]
    elif content_type.startswith("application/json"):
        try:
            payload = json.loads(body.decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise RequestError(400, f"body is not valid JSON: {exc}")
        if not isinstance(payload, dict):
            raise RequestError(400, "JSON body must be an object")

        def get_img(key):
            if key not in payload or payload[key] is None:
                return None
            try:
                raw = base64.b64decode(payload[key], validate=True)
            except Exception as exc:
                raise RequestError(400, f"{key}: invalid base64 ({exc})")
            return _decode_png(raw, key, max_dim)

        refs = [_decode_png(base64.b64decode(r), "ref", max_dim)
                for r in payload.get("refs", [])]
    else:
        raise RequestError(400, f"unsupported content type {content_type!r}")

    if not isinstance(payload, dict):
        raise RequestError(400, "payload must be a JSON object")
    mode = payload.get("mode")
    if mode not in ("references", "cross_attribution", "parameters"):
        raise RequestError(400, f"unknown or missing mode {mode!r}")
    low = get_img("low")
    if low is None:
        raise RequestError(400, "missing low image")

    req = EnhanceRequest(
        low=low,
        mode=mode,
        refs=refs or None,
        bright_ref=get_img("bright_ref"),
        chroma_ref=get_img("chroma_ref"),
        noise_ref=get_img("noise_ref"),
        params=_params_from_payload(payload) if mode == "parameters" else None,
    )
    try:
        req.validate()
    except ValueError as exc:
        raise RequestError(400, str(exc)) from exc
    debug = bool(payload.get("debug", False))
    return req, debug


def _response_json(resp, include_intermediates: bool) -> dict:
    # The pipeline always runs with intermediates here so histogram numbers
    # come from the true enhanced illumination, debug panel or not.
    inter = resp.intermediates
    result_hist = hard_histogram(inter["l_en"])
    guidance = resp.correlations.brightness_hist
    out = {
        "enhanced": _encode_png(resp.enhanced),
        "correlations": resp.correlations.to_json_dict(),
        "result_brightness_hist": [float(v) for v in result_hist],
        "metrics": {
            "hist_l1_enhanced_vs_ref": hist_l1(result_hist, guidance),
            "hist_l1_input_vs_ref": hist_l1(hard_histogram(inter["l_low"]),
                                            guidance),
        },
    }
    if include_intermediates:
        out["intermediates"] = {
            "l_low": _encode_png(inter["l_low"]),
            "l_en": _encode_png(inter["l_en"]),
            "r_low": _encode_png(inter["r_low"]),
            "r_en": _encode_png(inter["r_en"]),
            "r_de": _encode_png(inter["r_de"]),
            "n_en": _encode_scaled(inter["n_en"]),
            "n_de": _encode_scaled(inter["n_de"]),
        }
    return out


def make_handler(nets: EnhancerNets, cfg: ServiceConfig):
    class Handler(BaseHTTPRequestHandler):
        server_version = "relight/0.1"
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send_json(self, status: int, obj: dict) -> None:
            blob = json.dumps(obj).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(blob)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(blob)

        def do_GET(self):
            path = urlparse(self.path).path
            if path == "/health":
                self._send_json(200, {"status": "ok"})
            elif path == "/checkpoint-info":
                info = {}
                for name in ("brighten", "enhance", "denoise"):
                    net = getattr(nets, name)
                    info[name] = {
                        "arch": net.arch,
                        "parameters": int(sum(p.size for p in net.params.values())),
                    }
                self._send_json(200, info)
            else:
                self._send_json(404, {"error": f"no such endpoint {path}"})

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

        def do_POST(self):
            parsed = urlparse(self.path)
            if parsed.path != "/enhance":
                self._send_json(404, {"error": f"no such endpoint {parsed.path}"})
                return
            try:
                length = int(self.headers.get("Content-Length", "0"))
                body = self.rfile.read(length)
                ctype = self.headers.get("Content-Type", "")
                req, debug = build_request(ctype, body, cfg.max_dim)
                query = parse_qs(parsed.query)
                debug = debug or query.get("debug", ["0"])[0] in ("1", "true")
                resp = enhance(req, nets, debug=True,
                               smoothness_weight=cfg.smoothness_weight,
                               iterations=cfg.iterations)
                self._send_json(200, _response_json(resp, include_intermediates=debug))
            except RequestError as exc:
                self._send_json(exc.status, {"error": exc.message})
            except ValueError as exc:
                self._send_json(400, {"error": str(exc)})
            except Exception as exc:  # pragma: no cover - defensive
                self._send_json(500, {"error": f"internal failure: {exc}"})

    return Handler


def create_server(nets: EnhancerNets, cfg: ServiceConfig) -> ThreadingHTTPServer:
    handler = make_handler(nets, cfg)
    return ThreadingHTTPServer((cfg.host, cfg.port), handler)


def serve(checkpoint_dir: str, cfg: ServiceConfig) -> None:
    """Blocking entry point used by the CLI."""
    nets = load_enhancer(checkpoint_dir)
    server = create_server(nets, cfg)
    print(f"serving on http://{cfg.host}:{server.server_address[1]} "
          f"(checkpoints: {checkpoint_dir})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
