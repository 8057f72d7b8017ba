"""Checkpoint I/O: one .npz per checkpoint with a JSON metadata header.

Every checkpoint carries a versioned header (format version, architecture
tag, and content hashes of whatever the model depends on) so stale or
mismatched checkpoints fail loudly at load time.
"""
import hashlib
import json
import os
import tempfile

import numpy as np

FORMAT_VERSION = 1
_META_KEY = "__meta__"


def save_checkpoint(path, arrays, meta):
    meta = dict(meta)
    meta["format_version"] = FORMAT_VERSION
    payload = {_META_KEY: np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8)}
    for k, v in arrays.items():
        if k == _META_KEY:
            raise ValueError(f"array name {k!r} is reserved")
        payload[k] = np.asarray(v)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)), suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            np.savez(f, **payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path, expect_arch=None):
    with np.load(path) as z:
        meta = json.loads(bytes(z[_META_KEY]).decode())
        arrays = {k: z[k] for k in z.files if k != _META_KEY}
    if meta.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format: {meta.get('format_version')}")
    if expect_arch is not None and meta.get("arch") != expect_arch:
        raise ValueError(f"checkpoint arch {meta.get('arch')!r} != expected {expect_arch!r}")
    return meta, arrays


def content_hash(obj):
    """Stable short hash of a JSON-serialisable object."""
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
