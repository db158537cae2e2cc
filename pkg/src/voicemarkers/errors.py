"""Exception hierarchy shared across the toolkit.

Exit-code mapping used by the CLI: UsageError -> 1, DataError -> 2,
anything else -> 3.
"""


class VoicemarkersError(Exception):
    """Base class for all toolkit errors."""


class UsageError(VoicemarkersError):
    """Bad command-line invocation or inconsistent options."""


class DataError(VoicemarkersError):
    """Malformed or unusable input data (manifests, audio, feature tables)."""
