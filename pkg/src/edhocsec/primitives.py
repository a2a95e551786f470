"""Cryptographic building blocks: DH groups, SHA-256, HKDF, one-time pad, AES-CCM.

Everything here is a pure function of its arguments. Tag lengths are runtime
parameters so that forgery experiments can shrink them to a few bits.
"""
from __future__ import annotations

import hashlib
import hmac
import random
import struct
from functools import lru_cache
from dataclasses import dataclass
from enum import Enum

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import AESCCM

from .errors import InvalidPoint, LengthError, ParameterError

HASH_LEN = 32
P256_ORDER = 0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551
CCM_TAG_BITS = frozenset(range(32, 129, 16))
MAX_AEAD_PLAINTEXT = 1 << 16


class Curve(str, Enum):
    X25519 = "x25519"
    P256 = "p256"


class Variant(str, Enum):
    BASELINE = "baseline"
    IMPROVED = "improved"


@dataclass(frozen=True)
class SuiteParams:
    """Length and algorithm parameters of one cipher-suite instance.

    All lengths are in bits. ``l_mac`` sizes t_2 (and t_3 in the baseline),
    ``l_sec`` sizes t_3 in the improved variant, ``aead_tag`` sizes the CCM
    tag of c_3 (baseline) and c_4 (improved). ``l_id`` is the fixed encoded
    length of every identity label in a deployment.
    """

    curve: Curve = Curve.X25519
    variant: Variant = Variant.BASELINE
    l_mac: int = 64
    l_sec: int = 128
    aead_tag: int = 64
    l_hash: int = 256
    l_key: int = 128
    l_iv: int = 104
    l_id: int = 32
    nl: int = 32

    def __post_init__(self):
        object.__setattr__(self, "curve", Curve(self.curve))
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.l_hash != 256:
            raise ParameterError("only SHA-256 (l_hash=256) is supported")
        if self.l_key != 128:
            raise ParameterError("AES-CCM-16-64-128 needs a 128-bit key")
        if self.l_iv != 104:
            raise ParameterError("the CCM nonce is 13 bytes (l_iv=104)")
        if not 1 <= self.l_mac <= 8 * 255 * HASH_LEN:
            raise ParameterError(f"l_mac out of range: {self.l_mac}")
        if not 1 <= self.aead_tag <= 128:
            raise ParameterError(f"aead_tag out of range: {self.aead_tag}")
        if self.variant is Variant.IMPROVED and self.l_sec < self.l_mac:
            raise ParameterError("l_sec must be at least l_mac")
        for name in ("l_id", "nl"):
            value = getattr(self, name)
            if value <= 0 or value % 8:
                raise ParameterError(f"{name} must be a positive multiple of 8")

    @property
    def t3_bits(self) -> int:
        return self.l_sec if self.variant is Variant.IMPROVED else self.l_mac

    @property
    def id_len(self) -> int:
        return self.l_id // 8

    @property
    def cid_len(self) -> int:
        return self.nl // 8


def bit_bytes(bits: int) -> int:
    """Number of bytes needed to carry ``bits`` bits."""
    return (bits + 7) // 8


def truncate_bits(data: bytes, bits: int) -> bytes:
    """Keep the first ``bits`` bits of ``data``; unused trailing bits are zeroed."""
    n = bit_bytes(bits)
    if len(data) < n:
        raise LengthError(f"need {n} bytes, got {len(data)}")
    if not bits % 8:
        return data[:n]
    out = bytearray(data[:n])
    spare = 8 * n - bits
    if spare:
        out[-1] &= (0xFF << spare) & 0xFF
    return bytes(out)


# -- Diffie-Hellman ---------------------------------------------------------


@dataclass(frozen=True)
class KeyPair:
    curve: Curve
    secret: bytes
    public: bytes

    def __repr__(self):
        return f"KeyPair(curve={self.curve.value}, public={self.public.hex()})"


# Loading a private key costs a full scalar multiplication; ephemerals are
# used two or three times and static keys thousands of times.
@lru_cache(maxsize=4096)
def _x25519_key(secret: bytes) -> X25519PrivateKey:
    return X25519PrivateKey.from_private_bytes(secret)


@lru_cache(maxsize=4096)
def _p256_key(secret: bytes) -> ec.EllipticCurvePrivateKey:
    return ec.derive_private_key(int.from_bytes(secret, "big"), ec.SECP256R1())


# DH is a pure function of (secret, public); campaigns repeat some pairs
# (static key times a fixed adversary ephemeral) on every trial.
@lru_cache(maxsize=4096)
def _x25519_exchange(secret: bytes, peer_public: bytes) -> bytes:
    return _x25519_key(secret).exchange(X25519PublicKey.from_public_bytes(peer_public))


def public_from_secret(secret: bytes, curve: Curve = Curve.X25519) -> bytes:
    if Curve(curve) is Curve.X25519:
        return _x25519_key(secret).public_key().public_bytes_raw()
    return _p256_key(secret).public_key().public_numbers().x.to_bytes(32, "big")


def dh_keygen(rng: random.Random, suite: SuiteParams | Curve = Curve.X25519) -> KeyPair:
    """Sample a key pair from ``rng``; identical rng states give identical pairs."""
    curve = suite.curve if isinstance(suite, SuiteParams) else Curve(suite)
    if curve is Curve.X25519:
        secret = rng.randbytes(32)
    else:
        secret = rng.randrange(1, P256_ORDER).to_bytes(32, "big")
    return KeyPair(curve, secret, public_from_secret(secret, curve))


def _p256_point(public: bytes) -> ec.EllipticCurvePublicKey:
    if len(public) != 32:
        raise InvalidPoint("P-256 public keys are 32-byte x-coordinates")
    try:
        return ec.EllipticCurvePublicKey.from_encoded_point(
            ec.SECP256R1(), b"\x02" + public
        )
    except ValueError as exc:
        raise InvalidPoint("not the x-coordinate of a P-256 point") from exc


def dh_shared(secret: bytes, peer_public: bytes, curve: Curve = Curve.X25519) -> bytes:
    """Return the encoding of ``peer_public ** secret``.

    P-256 elements are carried as x-coordinates, so the result is independent
    of which of the two candidate points the encoding decompresses to.
    """
    curve = Curve(curve)
    if curve is Curve.X25519:
        if len(peer_public) != 32:
            raise InvalidPoint("X25519 public keys are 32 bytes")
        try:
            shared = _x25519_exchange(secret, peer_public)
        except ValueError as exc:
            raise InvalidPoint("low-order X25519 point") from exc
        if not any(shared):
            raise InvalidPoint("all-zero X25519 shared secret")
        return shared
    return _p256_key(secret).exchange(ec.ECDH(), _p256_point(peer_public))


# -- hash and HKDF ----------------------------------------------------------


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def extract(salt: bytes, ikm: bytes) -> bytes:
    """HKDF-Extract with SHA-256. An empty salt acts as 32 zero bytes."""
    return hmac.digest(salt or bytes(HASH_LEN), ikm, "sha256")


def hkdf_expand(prk: bytes, info: bytes, length: int) -> bytes:
    """Raw HKDF-Expand producing ``length`` bytes."""
    if length > 255 * HASH_LEN:
        raise LengthError(f"HKDF-Expand cannot produce {length} bytes")
    if length <= HASH_LEN:
        return hmac.digest(prk, info + b"\x01", "sha256")[:length]
    okm = b""
    block = b""
    counter = 1
    while len(okm) < length:
        block = hmac.digest(prk, block + info + bytes((counter,)), "sha256")
        okm += block
        counter += 1
    return okm[:length]


def encode_info(label: int, context: bytes, out_len_bits: int) -> bytes:
    return struct.pack(">BI", label, len(context)) + context + struct.pack(">H", out_len_bits)


def expand(prk: bytes, label: int, context: bytes, out_len_bits: int) -> bytes:
    """Derive ``out_len_bits`` bits bound to ``label`` and ``context``.

    Lengths that are not a whole number of bytes are rounded up and the spare
    low-order bits of the last byte are cleared.
    """
    if not 0 <= label <= 0xFF:
        raise LengthError(f"label must fit in one byte: {label}")
    if not 0 < out_len_bits <= 8 * 255 * HASH_LEN:
        raise LengthError(f"unsupported output length: {out_len_bits} bits")
    info = encode_info(label, context, out_len_bits)
    n = bit_bytes(out_len_bits)
    if n <= HASH_LEN:
        okm = hmac.digest(prk, info + b"\x01", "sha256")[:n]
    else:
        okm = hkdf_expand(prk, info, n)
    return okm if not out_len_bits % 8 else truncate_bits(okm, out_len_bits)


# -- symmetric encryption ---------------------------------------------------


def otp_encrypt(key: bytes, msg: bytes) -> bytes:
    if len(key) != len(msg):
        raise LengthError(f"one-time key is {len(key)} bytes, message {len(msg)}")
    return (int.from_bytes(key, "big") ^ int.from_bytes(msg, "big")).to_bytes(len(msg), "big")


otp_decrypt = otp_encrypt


def _check_aead_args(key: bytes, nonce: bytes, tag_bits: int) -> None:
    if len(key) != 16:
        raise LengthError("AES-CCM-16-64-128 takes a 16-byte key")
    if not 7 <= len(nonce) <= 13:
        raise LengthError("CCM nonces are 7 to 13 bytes")
    if not 1 <= tag_bits <= 128:
        raise LengthError(f"unsupported tag length: {tag_bits} bits")


def _ccm_keystream(key: bytes, nonce: bytes, length: int) -> bytes:
    # CTR blocks do not depend on the tag length or the associated data.
    return AESCCM(key, tag_length=16).encrypt(nonce, bytes(length), None)[:length]


def aead_seal(key: bytes, nonce: bytes, plaintext: bytes, aad: bytes = b"", tag_bits: int = 64) -> bytes:
    """AES-CCM encryption returning ciphertext followed by a ``tag_bits`` tag.

    Standard CCM tag sizes (32..128 bits, step 16) use the native tag; any
    other size is the 128-bit tag truncated to ``tag_bits``.
    """
    _check_aead_args(key, nonce, tag_bits)
    if len(plaintext) >= MAX_AEAD_PLAINTEXT:
        raise LengthError("CCM-16 limits plaintexts to 2**16 bytes")
    if tag_bits in CCM_TAG_BITS:
        return AESCCM(key, tag_length=tag_bits // 8).encrypt(nonce, plaintext, aad)
    sealed = AESCCM(key, tag_length=16).encrypt(nonce, plaintext, aad)
    return sealed[:-16] + truncate_bits(sealed[-16:], tag_bits)


def aead_open(key: bytes, nonce: bytes, ciphertext: bytes, aad: bytes = b"", tag_bits: int = 64) -> bytes | None:
    """Inverse of :func:`aead_seal`; returns ``None`` when authentication fails."""
    _check_aead_args(key, nonce, tag_bits)
    n = bit_bytes(tag_bits)
    if len(ciphertext) < n:
        return None
    if tag_bits in CCM_TAG_BITS:
        try:
            return AESCCM(key, tag_length=n).decrypt(nonce, ciphertext, aad)
        except InvalidTag:
            return None
    body, tag = ciphertext[:-n], ciphertext[-n:]
    plaintext = otp_decrypt(_ccm_keystream(key, nonce, len(body)), body)
    expected = aead_seal(key, nonce, plaintext, aad, tag_bits)[-n:]
    return plaintext if hmac.compare_digest(expected, tag) else None
