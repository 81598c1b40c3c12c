"""Exception hierarchy shared across the package.

Every domain error derives from XamrError so callers (notably the CLI)
can distinguish input problems from genuine bugs.
"""


class XamrError(Exception):
    """Base class for all domain errors raised by this package."""


class MalformedRolesetId(XamrError):
    pass


class FrameParseError(XamrError):
    def __init__(self, message: str, path: str | None = None, location: str | None = None):
        self.path = path
        self.location = location
        where = " @ ".join(s for s in (path, location) if s)
        super().__init__(f"{message} ({where})" if where else message)


class CorpusParseError(XamrError):
    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = path or ""
        if line is not None:
            where += f":{line}"
        super().__init__(f"{message} ({where})" if where else message)


class DanglingMarkable(CorpusParseError):
    pass


class UnknownTopic(XamrError):
    pass


class SpanOutOfBounds(XamrError):
    pass


class DimensionMismatch(XamrError):
    pass


class SlotValueMismatch(XamrError):
    pass


class UnknownMention(XamrError):
    pass


class NoJsonFound(XamrError):
    pass


class MissingRequiredKey(XamrError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"missing required key: {key}")


class ClientError(XamrError):
    pass


class EmptyIntersection(XamrError):
    pass


class MentionMismatch(XamrError):
    pass
