"""Human-in-the-loop review: durable campaigns, votes, agreement, export."""

from .store import (
    CampaignSnapshot,
    ReviewError,
    ReviewStore,
    agreement,
    campaign_id_for,
    export_accepted,
    resolve_verdict,
    task_from_payload,
    task_to_payload,
    vote_from_payload,
    vote_to_payload,
)
from .service import ReviewServer, serve_review

__all__ = [
    "CampaignSnapshot",
    "ReviewError",
    "ReviewServer",
    "ReviewStore",
    "agreement",
    "campaign_id_for",
    "export_accepted",
    "resolve_verdict",
    "serve_review",
    "task_from_payload",
    "task_to_payload",
    "vote_from_payload",
    "vote_to_payload",
]
