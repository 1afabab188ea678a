"""Photonic entanglement and QKD simulator."""

import json as _json

from ._qphoton import *  # noqa: F401,F403
from . import _qphoton


def bb84_record(*args, **kwargs):
    """bb84() with the JSON record parsed into a dict."""
    return _json.loads(_qphoton.bb84(*args, **kwargs))


def ekert_record(*args, **kwargs):
    return _json.loads(_qphoton.ekert(*args, **kwargs))
