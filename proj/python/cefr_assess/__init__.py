"""CEFR level assessment of Estonian learner texts."""

import json

from ._core import (
    CefrError,
    ConfigError,
    DataError,
    ParseError,
    UpstreamError,
    catalog_hash,
    extract,
)
from ._core import Service as _Service
from ._core import catalog_json as _catalog_json

__all__ = [
    "AssessError",
    "CefrError",
    "ConfigError",
    "DataError",
    "ParseError",
    "Service",
    "UpstreamError",
    "catalog",
    "catalog_hash",
    "extract",
]


class AssessError(Exception):
    """Non-200 reply from the assessment service."""

    def __init__(self, status, body):
        super().__init__(f"{status}: {body.get('error', body)}")
        self.status = status
        self.body = body


def catalog():
    """The built-in feature catalog."""
    return json.loads(_catalog_json())


class Service:
    """Loaded assessment models, as served over HTTP by ``cefr serve``."""

    def __init__(self, config):
        self._svc = _Service(str(config))

    @property
    def ready(self):
        return self._svc.ready

    def request(self, payload):
        """Returns (status, body) for a raw /assess request body."""
        if not isinstance(payload, str):
            payload = json.dumps(payload)
        status, body = self._svc.assess_raw(payload)
        return status, json.loads(body)

    def assess(self, conllu=None, text=None):
        payload = {}
        if conllu is not None:
            payload["conllu"] = conllu
        if text is not None:
            payload["text"] = text
        status, body = self.request(payload)
        if status != 200:
            raise AssessError(status, body)
        return body

    def health(self):
        return json.loads(self._svc.health_json())

    def models(self):
        return json.loads(self._svc.models_json())
