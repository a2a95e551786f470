"""Exception hierarchy shared by every layer of the package."""


class EdhocError(Exception):
    """Base class for all errors raised by edhocsec."""


class InvalidPoint(EdhocError, ValueError):
    """A public key does not encode a usable group element."""


class LengthError(EdhocError, ValueError):
    """An input or requested output has an unsupported length."""


class DecodeError(EdhocError, ValueError):
    """Wire bytes could not be parsed."""


class ProtocolStateError(EdhocError, RuntimeError):
    """A handshake step was invoked out of order."""


class ParameterError(EdhocError, ValueError):
    """Suite or run parameters violate their constraints."""
