"""EDHOC static-DH key exchange, its four-message hardening, and a forgery harness."""
from .errors import (
    DecodeError,
    EdhocError,
    InvalidPoint,
    LengthError,
    ParameterError,
    ProtocolStateError,
)
from .primitives import Curve, KeyPair, SuiteParams, Variant
from .protocol import Handshake, Role, SessionState, Status, run_handshake

__all__ = [
    "Curve",
    "DecodeError",
    "EdhocError",
    "Handshake",
    "InvalidPoint",
    "KeyPair",
    "LengthError",
    "ParameterError",
    "ProtocolStateError",
    "Role",
    "SessionState",
    "Status",
    "SuiteParams",
    "Variant",
    "run_handshake",
]

__version__ = "0.1.0"
