"""EDHOC STAT/STAT key schedule for the three- and four-message variants.

Transcript hashes and MAC contexts are hashed over length-prefixed tuples
(see :func:`edhocsec.wire.encode_fields`) so variable-length fields cannot
be shifted across boundaries.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ParameterError
from .primitives import SuiteParams, Variant, expand, extract, sha256
from .wire import encode_fields

# expand labels
SK2, SALT_3E2M, T2, SK3, IV3, SALT_4E3M, T3, PRK_OUT, SK4, IV4 = range(10)
EXPORTER_MIN_LABEL = 16

HASH_BITS = 256


@dataclass
class TranscriptState:
    th2: bytes | None = None
    th3: bytes | None = None
    th4: bytes | None = None


@dataclass
class PrkChain:
    prk2e: bytes | None = None
    salt3e2m: bytes | None = None
    prk3e2m: bytes | None = None
    salt4e3m: bytes | None = None
    prk4e3m: bytes | None = None
    prk_out: bytes | None = None


@dataclass
class DerivedMaterial:
    sk2: bytes | None = None
    t2: bytes | None = None
    sk3: bytes | None = None
    iv3: bytes | None = None
    t3: bytes | None = None
    sk4: bytes | None = None
    iv4: bytes | None = None


def compute_th2(y_e: bytes, c_r: bytes, m1: bytes) -> bytes:
    return sha256(encode_fields(y_e, c_r, sha256(m1)))


def compute_th3(th2: bytes, m2: bytes) -> bytes:
    return sha256(encode_fields(th2, m2))


def compute_th4(th3: bytes, m3: bytes, m3_prime: bytes | None = None) -> bytes:
    if m3_prime is None:
        return sha256(encode_fields(th3, m3))
    return sha256(encode_fields(th3, m3, m3_prime))


def mac_context(identity: bytes, th: bytes, static_pub: bytes, ead: bytes) -> bytes:
    """CTX_2 / CTX_3: (ID, TH, static public key, EAD)."""
    return encode_fields(identity, th, static_pub, ead)


def derive_prk2e(suite: SuiteParams, th2: bytes, gxy: bytes) -> bytes:
    # The four-message variant salts with TH_2 so each session gets its own PRK_2e.
    salt = th2 if suite.variant is Variant.IMPROVED else b""
    return extract(salt, gxy)


def derive_message2_material(prk2e: bytes, th2: bytes, lpt_bits: int) -> tuple[bytes, bytes]:
    """Return (sk_2, salt_3e2m); sk_2 is exactly as long as the plaintext of m_2."""
    sk2 = expand(prk2e, SK2, th2, lpt_bits)
    salt3e2m = expand(prk2e, SALT_3E2M, th2, HASH_BITS)
    return sk2, salt3e2m


def derive_prk3e2m(salt3e2m: bytes, g_rx: bytes) -> bytes:
    return extract(salt3e2m, g_rx)


def derive_t2(prk3e2m: bytes, ctx2: bytes, l_mac: int) -> bytes:
    return expand(prk3e2m, T2, ctx2, l_mac)


def derive_message3_material(prk3e2m: bytes, th3: bytes, suite: SuiteParams) -> tuple[bytes, bytes | None, bytes]:
    """Return (sk_3, IV_3, salt_4e3m).

    In the improved variant sk_3 is a one-time key over the identity label and
    there is no IV_3.
    """
    if suite.variant is Variant.IMPROVED:
        sk3 = expand(prk3e2m, SK3, th3, suite.l_id)
        iv3 = None
    else:
        sk3 = expand(prk3e2m, SK3, th3, suite.l_key)
        iv3 = expand(prk3e2m, IV3, th3, suite.l_iv)
    salt4e3m = expand(prk3e2m, SALT_4E3M, th3, HASH_BITS)
    return sk3, iv3, salt4e3m


def derive_prk4e3m(salt4e3m: bytes, g_iy: bytes) -> bytes:
    return extract(salt4e3m, g_iy)


def derive_t3(prk4e3m: bytes, ctx3: bytes, suite: SuiteParams) -> bytes:
    return expand(prk4e3m, T3, ctx3, suite.t3_bits)


def derive_message4_material(prk4e3m: bytes, th4: bytes, suite: SuiteParams) -> tuple[bytes, bytes]:
    if suite.variant is not Variant.IMPROVED:
        raise ParameterError("message 4 exists only in the improved variant")
    return expand(prk4e3m, SK4, th4, suite.l_key), expand(prk4e3m, IV4, th4, suite.l_iv)


def derive_session_key(prk4e3m: bytes, th4: bytes) -> bytes:
    """PRK_out, which is the session key SK."""
    return expand(prk4e3m, PRK_OUT, th4, HASH_BITS)


def exporter(prk4e3m: bytes, th4: bytes, label: int, length_bits: int, context: bytes = b"") -> bytes:
    if label < EXPORTER_MIN_LABEL:
        raise ParameterError(f"exporter labels start at {EXPORTER_MIN_LABEL}; 0-9 are protocol labels")
    return expand(prk4e3m, label, encode_fields(th4, context), length_bits)


def key_update(prk4e3m: bytes, nonce: bytes) -> bytes:
    """Fresh chain key replacing PRK_4e3m, from a nonce both parties agreed on."""
    return extract(nonce, prk4e3m)
