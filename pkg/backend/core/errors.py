from typing import List, Optional


class RISNetError(Exception):
    """Base class for every domain error raised by the library."""


class SingularConversion(RISNetError):
    """A parameter conversion needed an inverse that does not numerically exist."""


class SingularSystem(RISNetError):
    """The termination system is resonant or ill-posed."""


class NotBlockLowerTriangular(RISNetError):
    pass


class NotUnilateral(RISNetError):
    pass


class KindMismatch(RISNetError):
    pass


class NotSymmetric(RISNetError):
    pass


class InvalidGeometry(RISNetError):
    pass


class ConfigError(RISNetError):
    """Configuration problems, reported all at once."""

    def __init__(self, messages: List[str], path: Optional[str] = None):
        self.messages = list(messages)
        self.path = path
        prefix = f"{path}: " if path else ""
        super().__init__(prefix + "; ".join(self.messages))
