"""Exception hierarchy shared by every stage of the pipeline."""


class PrestigeRankError(Exception):
    """Base class; ``stage`` names the pipeline stage that raised."""

    stage = "unknown"


class CorpusError(PrestigeRankError):
    stage = "corpus"


class CorpusParseError(CorpusError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")


class DuplicateKeyError(CorpusError):
    pass


class ReferentialError(CorpusError):
    pass


class NetworkError(PrestigeRankError):
    stage = "network"


class EmptyYearError(NetworkError):
    pass


class PrestigeError(PrestigeRankError):
    stage = "prestige"


class DegenerateNetworkError(PrestigeError):
    """Raised when no journal transfers prestige through links."""


class AnalyticsError(PrestigeRankError):
    stage = "analytics"


class SchemaVersionError(PrestigeRankError):
    stage = "io"


class ConfigError(PrestigeRankError):
    stage = "config"
