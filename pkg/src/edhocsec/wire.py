"""Byte-level codec for handshake messages and length-prefixed tuples.

Every field is written as a 4-byte big-endian length followed by its bytes.
A message starts with one kind byte.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum

from .errors import DecodeError


class Kind(IntEnum):
    MSG1 = 1
    MSG2 = 2
    MSG3 = 3
    MSG4 = 4


def encode_fields(*fields: bytes) -> bytes:
    return b"".join([struct.pack(">I", len(f)) + f for f in fields])


def decode_fields(data: bytes) -> list[bytes]:
    fields = []
    pos = 0
    while pos < len(data):
        if pos + 4 > len(data):
            raise DecodeError("truncated length prefix")
        (n,) = struct.unpack_from(">I", data, pos)
        pos += 4
        if pos + n > len(data):
            raise DecodeError("field runs past end of input")
        fields.append(data[pos : pos + n])
        pos += n
    return fields


@dataclass(frozen=True)
class Msg1:
    x_e: bytes
    c_i: bytes
    ead1: bytes = b""


@dataclass(frozen=True)
class Msg2:
    y_e: bytes
    c2: bytes
    c_r: bytes


@dataclass(frozen=True)
class Msg3:
    c3: bytes
    # cleartext (t_3 || EAD_3); present only in the four-message variant
    m3_prime: bytes | None = None


@dataclass(frozen=True)
class Msg4:
    c4: bytes
    m4_prime: bytes = b""


WireMessage = Msg1 | Msg2 | Msg3 | Msg4

_FIELDS = {
    Kind.MSG1: (Msg1, ("x_e", "c_i", "ead1")),
    Kind.MSG2: (Msg2, ("y_e", "c2", "c_r")),
    Kind.MSG4: (Msg4, ("c4", "m4_prime")),
}


_KINDS = {Msg1: Kind.MSG1, Msg2: Kind.MSG2, Msg3: Kind.MSG3, Msg4: Kind.MSG4}


def kind_of(msg: WireMessage) -> Kind:
    try:
        return _KINDS[type(msg)]
    except KeyError:
        raise TypeError(f"not a wire message: {msg!r}") from None


def encode(msg: WireMessage) -> bytes:
    kind = kind_of(msg)
    if kind is Kind.MSG3:
        fields = (msg.c3,) if msg.m3_prime is None else (msg.c3, msg.m3_prime)
    else:
        fields = tuple(getattr(msg, name) for name in _FIELDS[kind][1])
    return bytes((kind,)) + encode_fields(*fields)


def decode(data: bytes, expect: Kind | None = None) -> WireMessage:
    if not data:
        raise DecodeError("empty message")
    try:
        kind = Kind(data[0])
    except ValueError:
        raise DecodeError(f"unknown message kind {data[0]}") from None
    if expect is not None and kind is not expect:
        raise DecodeError(f"expected {expect.name}, got {kind.name}")
    fields = decode_fields(data[1:])
    if kind is Kind.MSG3:
        if len(fields) not in (1, 2):
            raise DecodeError("message 3 carries one or two fields")
        return Msg3(*fields)
    cls, names = _FIELDS[kind]
    if len(fields) != len(names):
        raise DecodeError(f"{kind.name} carries {len(names)} fields, got {len(fields)}")
    return cls(*fields)
