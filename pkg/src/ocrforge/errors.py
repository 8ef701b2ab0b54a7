"""Exception types shared across the package."""

from __future__ import annotations


class CorpusError(ValueError):
    """Structural problem in an input corpus (mismatched sides, empty data, bad row)."""


class ProtocolError(RuntimeError):
    """An external evaluator process violated the request/response protocol.

    Raised for transport-level failures: unparseable output, missing response
    fields, or a dead process.  A well-formed response with status "error" is
    an ordinary failed trial, not a protocol error.
    """


class StageFailedError(RuntimeError):
    """Every candidate value of one greedy-search stage failed to evaluate."""

    def __init__(self, stage: str, message: str = ""):
        self.stage = stage
        super().__init__(message or f"all trials failed in stage {stage!r}")
