"""Exception types shared across the package.

Every failure mode callers are expected to branch on gets its own class;
message text is for humans, the class is the contract.
"""

from __future__ import annotations


class MediaContextError(Exception):
    """Base class for all package-specific errors."""


# --- fetching -----------------------------------------------------------


class FetchError(MediaContextError):
    """Base class for article/media fetch failures."""


class FetchNetworkError(FetchError):
    """Transport-level failure (DNS, connect, timeout, too many redirects)."""


class FetchStatusError(FetchError):
    """Non-success HTTP status."""

    def __init__(self, status: int, url: str):
        super().__init__(f"HTTP {status} fetching {url}")
        self.status = status
        self.url = url


class FetchContentTypeError(FetchError):
    """Response declared a content type the caller cannot accept."""


class FetchSizeError(FetchError):
    """Response body exceeded the configured byte cap."""


class ExtractionError(MediaContextError):
    """A required article field could not be extracted from the HTML."""

    def __init__(self, missing_field: str):
        super().__init__(f"no extractable {missing_field}")
        self.missing_field = missing_field


# --- provenance ---------------------------------------------------------


class ManifestParseError(MediaContextError):
    """Structurally invalid segment/box data.

    ``offset`` is the byte offset of the failure where known; ``box_label``
    names the failing box when the failure is inside the box tree.
    """

    def __init__(self, message: str, *, offset: int | None = None, box_label: str | None = None):
        detail = message
        if offset is not None:
            detail += f" (at byte {offset})"
        if box_label is not None:
            detail += f" (box {box_label!r})"
        super().__init__(detail)
        self.offset = offset
        self.box_label = box_label


class SidecarValidationError(MediaContextError):
    """Sidecar document violates the sidecar schema."""

    def __init__(self, field: str, message: str):
        super().__init__(f"sidecar field {field!r}: {message}")
        self.field = field


# --- model backend ------------------------------------------------------


class BackendError(MediaContextError):
    """Base class for model-backend failures."""


class BackendTransportError(BackendError):
    """Could not reach the backend (network failure or timeout)."""


class BackendStatusError(BackendError):
    """Backend answered with a non-success HTTP status."""

    def __init__(self, status: int):
        super().__init__(f"backend returned HTTP {status}")
        self.status = status


class BackendEnvelopeError(BackendError):
    """Backend response body did not match the chat-completions envelope."""


class UnscriptedRequestError(BackendError):
    """Mock backend got a request with no scripted response and no default."""


class AssessmentParseError(MediaContextError):
    """Model output could not be structured into an Assessment."""


class PromptContractError(MediaContextError):
    """Prompt renderer inputs violate the renderer's contract."""


class ValidationError(MediaContextError):
    """Caller-supplied value fails a precondition (e.g. empty question)."""


# --- pipeline -----------------------------------------------------------


class AnalysisError(MediaContextError):
    """Analysis failed at a named pipeline stage.

    ``stage`` is one of ``ingest``, ``model``, ``parse``.
    """

    def __init__(self, stage: str, message: str):
        super().__init__(f"analysis failed at stage {stage!r}: {message}")
        self.stage = stage


class UnknownAnalysisError(MediaContextError):
    """Referenced analysis id is not in the store."""


class UnknownSessionError(MediaContextError):
    """Referenced chat session id is not in the store."""


class FollowupBackendError(BackendError):
    """Backend failed during a follow-up; the failure notice was appended."""

    def __init__(self, session_id: str, notice: str):
        super().__init__(f"backend failed answering follow-up in session {session_id}")
        self.session_id = session_id
        self.notice = notice
