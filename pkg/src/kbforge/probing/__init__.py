"""Cloze prompting against fill-mask backends over the wire protocol."""

from .client import (
    DEFAULT_K,
    BackendClient,
    BackendDescriptor,
    ProtocolError,
    TransportError,
    probe_batch,
)
from .mock import (
    MockBackendServer,
    MockFixtureError,
    MockModel,
    mock_model_from_lines,
    read_mock_model,
)
from .prompts import (
    MASK,
    ClozeQuery,
    instantiate_prompt,
    queries_for_records,
    render_prompt,
    specs_by_pid,
)

__all__ = [
    "DEFAULT_K",
    "MASK",
    "BackendClient",
    "BackendDescriptor",
    "ClozeQuery",
    "MockBackendServer",
    "MockFixtureError",
    "MockModel",
    "ProtocolError",
    "TransportError",
    "instantiate_prompt",
    "mock_model_from_lines",
    "probe_batch",
    "queries_for_records",
    "read_mock_model",
    "render_prompt",
    "specs_by_pid",
]
