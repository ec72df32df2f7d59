"""Checkpoint persistence: a JSON envelope with base64 float64 arrays.

The payload stores every named parameter plus both Adam moment arrays as
base64-encoded little-endian 64-bit floats, so a save/load round trip is
bit-exact. A SHA-256 checksum over the canonical JSON of everything except
the checksum field itself guards against corruption.
"""

from __future__ import annotations

import base64
import dataclasses
import hashlib
import json
from pathlib import Path

import numpy as np

from rewriteopt.cli.errors import ConfigError, DataError
from rewriteopt.nn.layers import EncoderConfig
from rewriteopt.nn.params import ParamStore

FORMAT_VERSION = 1


class CheckpointDataError(DataError):
    """Corrupt or unreadable checkpoint contents."""


class CheckpointMismatch(ConfigError):
    """Checkpoint is valid but does not match the requested configuration."""


def _encode_array(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a, dtype="<f8")
    return {
        "shape": [int(s) for s in a.shape],
        "data": base64.b64encode(a.tobytes()).decode("ascii"),
    }


def _decode_array(obj: dict) -> np.ndarray:
    raw = base64.b64decode(obj["data"])
    return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(obj["shape"])


def _checksum(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def save_checkpoint(
    path,
    domain_name: str,
    encoder_cfg: EncoderConfig,
    store: ParamStore,
    model_meta: dict | None = None,
) -> None:
    state = store.state_dict()
    payload = {
        "format_version": FORMAT_VERSION,
        "domain": domain_name,
        "encoder": dataclasses.asdict(encoder_cfg),
        "model_meta": model_meta or {},
        "global_step": int(state["global_step"]),
        "params": {k: _encode_array(v) for k, v in state["params"].items()},
        "adam_m": {k: _encode_array(v) for k, v in state["m"].items()},
        "adam_v": {k: _encode_array(v) for k, v in state["v"].items()},
    }
    payload["checksum"] = _checksum({k: v for k, v in payload.items()})
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_checkpoint(path) -> dict:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointDataError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict) or "checksum" not in payload:
        raise CheckpointDataError(f"checkpoint {path} has no checksum")
    body = {k: v for k, v in payload.items() if k != "checksum"}
    if payload["checksum"] != _checksum(body):
        raise CheckpointDataError(f"checksum mismatch in checkpoint {path}")
    if payload.get("format_version") != FORMAT_VERSION:
        raise CheckpointDataError(
            f"unsupported checkpoint format {payload.get('format_version')!r}"
        )
    return payload


def check_compatible(
    payload: dict,
    domain_name: str,
    encoder_cfg: EncoderConfig,
    model_meta: dict | None = None,
) -> None:
    """Raise when the checkpoint was written for a different setup."""
    if payload["domain"] != domain_name:
        raise CheckpointMismatch(
            f"checkpoint is for domain {payload['domain']!r}, not {domain_name!r}"
        )
    want = dataclasses.asdict(encoder_cfg)
    if payload["encoder"] != want:
        raise CheckpointMismatch(
            f"checkpoint encoder config {payload['encoder']} != requested {want}"
        )
    if (model_meta or {}) != payload.get("model_meta", {}):
        raise CheckpointMismatch(
            f"checkpoint model settings {payload.get('model_meta', {})} "
            f"!= requested {model_meta or {}}"
        )


def restore_store(payload: dict, store: ParamStore) -> None:
    """Load checkpointed parameters into a store with matching names."""
    params = {k: _decode_array(v) for k, v in payload["params"].items()}
    missing = sorted(set(store.names()) - set(params))
    extra = sorted(set(params) - set(store.names()))
    if missing or extra:
        raise CheckpointMismatch(
            f"parameter names differ (missing {missing}, unexpected {extra})"
        )
    try:
        store.load_state_dict(
            {
                "params": params,
                "m": {k: _decode_array(v) for k, v in payload["adam_m"].items()},
                "v": {k: _decode_array(v) for k, v in payload["adam_v"].items()},
                "global_step": payload["global_step"],
            }
        )
    except ValueError as exc:
        raise CheckpointMismatch(str(exc)) from exc


def encoder_from_payload(payload: dict) -> EncoderConfig:
    try:
        return EncoderConfig(**payload["encoder"])
    except (TypeError, ValueError) as exc:
        raise CheckpointDataError(f"bad encoder config in checkpoint: {exc}") from exc
