"""Exception hierarchy shared by all nlbox modules."""


class NlboxError(Exception):
    pass


class InvalidArgumentError(NlboxError, ValueError):
    """Malformed input: wrong lengths, bad descriptors, non-bits."""


class ResourceLimitError(NlboxError):
    """A size cap was exceeded."""


class PoolExhaustedError(ResourceLimitError):
    """More boxes requested than the pool holds."""


class BoxReuseError(NlboxError):
    """A party tried to measure the same box instance twice."""
