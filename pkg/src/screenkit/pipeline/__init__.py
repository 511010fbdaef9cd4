"""Job execution layer shared by the CLI and the HTTP service."""

from .jobs import SCHEMA, JobError, SpecError, execute, primary_artifact, spec_hash, validate

__all__ = ["SCHEMA", "JobError", "SpecError", "execute", "primary_artifact", "spec_hash", "validate"]
