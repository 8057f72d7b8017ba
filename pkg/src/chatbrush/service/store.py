"""Persistence: content-addressed image store + per-session JSON state.

Images are stored once under their SHA-256, so popping the stack restores
the exact prior bytes and a service restart reloads identical state. All
writes are write-temp-then-rename.
"""
import hashlib
import json
import os
import secrets
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone

from chatbrush import DataError
from chatbrush.dialogue import DialogueState
from chatbrush.diffusion import GuidanceConfig

STORE_ENV = "CHATBRUSH_STORE"
DEFAULT_STORE = "chatbrush_store"


def store_root_from_env(default=DEFAULT_STORE):
    return os.environ.get(STORE_ENV, default)


def _atomic_write(path, data):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path))
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _now():
    return datetime.now(timezone.utc).isoformat()


@dataclass
class Session:
    id: str
    image_stack: list  # content hashes, bottom = original upload (resized)
    dialogue: DialogueState
    guidance: GuidanceConfig
    created: str
    updated: str
    original_upload: str = None  # hash of the verbatim uploaded bytes

    @property
    def edit_count(self):
        return len(self.image_stack) - 1

    def to_json(self):
        return {
            "id": self.id,
            "image_stack": list(self.image_stack),
            "dialogue": self.dialogue.to_json(),
            "guidance": self.guidance.to_json(),
            "created": self.created,
            "updated": self.updated,
            "original_upload": self.original_upload,
        }

    @classmethod
    def from_json(cls, d):
        return cls(
            id=d["id"],
            image_stack=list(d["image_stack"]),
            dialogue=DialogueState.from_json(d["dialogue"]),
            guidance=GuidanceConfig.from_json(d["guidance"]),
            created=d["created"],
            updated=d["updated"],
            original_upload=d.get("original_upload"),
        )


class Store:
    def __init__(self, root):
        self.root = root
        os.makedirs(os.path.join(root, "images"), exist_ok=True)
        os.makedirs(os.path.join(root, "uploads"), exist_ok=True)
        os.makedirs(os.path.join(root, "sessions"), exist_ok=True)

    # content-addressed images (PNG bytes)
    def put_image(self, png_bytes):
        digest = hashlib.sha256(png_bytes).hexdigest()
        path = self.image_path(digest)
        if not os.path.exists(path):
            _atomic_write(path, png_bytes)
        return digest

    def image_path(self, digest):
        return os.path.join(self.root, "images", f"{digest}.png")

    def get_image(self, digest):
        path = self.image_path(digest)
        if not os.path.exists(path):
            raise KeyError(digest)
        with open(path, "rb") as f:
            return f.read()

    def put_upload(self, raw_bytes):
        digest = hashlib.sha256(raw_bytes).hexdigest()
        _atomic_write(os.path.join(self.root, "uploads", f"{digest}.bin"), raw_bytes)
        return digest

    # sessions
    def _session_path(self, session_id):
        if not session_id.replace("-", "").isalnum():
            raise DataError("malformed session id")
        return os.path.join(self.root, "sessions", f"{session_id}.json")

    def new_session(self, first_image_hash, guidance, original_upload=None):
        now = _now()
        session = Session(
            id=secrets.token_urlsafe(12).replace("_", "-"),
            image_stack=[first_image_hash],
            dialogue=DialogueState(),
            guidance=guidance,
            created=now,
            updated=now,
            original_upload=original_upload,
        )
        self.save_session(session)
        return session

    def save_session(self, session):
        session.updated = _now()
        blob = json.dumps(session.to_json(), sort_keys=True).encode()
        _atomic_write(self._session_path(session.id), blob)

    def load_session(self, session_id):
        path = self._session_path(session_id)
        if not os.path.exists(path):
            raise KeyError(session_id)
        with open(path) as f:
            return Session.from_json(json.load(f))
