"""Layered run configuration: defaults < INI config file < CLI flags.

The fully resolved mapping is embedded into every manifest and report so a
run can be reproduced from its outputs alone.
"""
import configparser
import copy

from chatbrush import DataError

DEFAULTS = {
    "data": {
        "resolution": 64,
        "n_dialogues": 2000,
        "n_pairs": 6000,
        "pair_kinds": "",  # comma-separated; empty = all kinds
    },
    "embed": {
        "epochs": 8,
        "batch_size": 128,
        "lr": 1e-3,
    },
    "diffusion": {
        "steps": 3000,
        "batch_size": 16,
        "lr": 2e-3,
        "lr_final": 2e-4,
        "base_channels": 16,
        "p_text": 0.05,
        "p_img": 0.05,
        "p_both": 0.05,
        "ema_decay": 0.999,
        "codec": "identity",
    },
    "dialogue": {
        "epochs": 12,
        "batch_size": 32,
        "lr": 1e-3,
    },
    "guidance": {
        "s_img": 1.5,
        "s_text": 7.5,
        "steps": 20,
        "eta": 0.0,
        "strength": 1.0,
    },
    "filter": {
        "tau": 0.2,  # recalibrated against a labelled validation set by eval
        "target_precision": 0.95,
    },
    "service": {
        "host": "127.0.0.1",
        "port": 8000,
    },
}


def _coerce(value, like):
    if isinstance(like, bool):
        return value.lower() in ("1", "true", "yes", "on")
    if isinstance(like, int):
        return int(value)
    if isinstance(like, float):
        return float(value)
    return value


class RunConfig:
    def __init__(self, sections=None):
        self.sections = copy.deepcopy(DEFAULTS)
        for sec, kv in (sections or {}).items():
            for k, v in kv.items():
                self.set(sec, k, v)

    @classmethod
    def load(cls, path=None):
        cfg = cls()
        if path is None:
            return cfg
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise DataError(f"config file not found: {path}")
        for sec in parser.sections():
            if sec not in cfg.sections:
                raise DataError(f"unknown config section [{sec}]")
            for key, raw in parser.items(sec):
                cfg.set(sec, key, raw, coerce=True)
        return cfg

    def set(self, section, key, value, coerce=False):
        if section not in self.sections or key not in self.sections[section]:
            raise DataError(f"unknown config key [{section}] {key}")
        if coerce:
            value = _coerce(value, self.sections[section][key])
        self.sections[section][key] = value

    def override(self, section, key, value):
        """CLI-flag layer; None means 'not given'."""
        if value is not None:
            self.set(section, key, value)

    def get(self, section, key):
        return self.sections[section][key]

    def resolved(self):
        return copy.deepcopy(self.sections)

    def pair_kinds(self):
        raw = self.get("data", "pair_kinds").strip()
        return tuple(k.strip() for k in raw.split(",") if k.strip()) or None
