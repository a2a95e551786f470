"""Handshake state machine for EDHOC with static-DH authentication on both sides.

Step functions take and return encoded wire bytes so that a harness can
inspect or tamper with the exact traffic. A failed check moves the session to
``Status.REJECTED`` and the step returns ``None``; calling a step out of order
raises :class:`~edhocsec.errors.ProtocolStateError`.
"""
from __future__ import annotations

import hmac
import random
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum

from . import key_schedule as ks
from .errors import DecodeError, InvalidPoint, ProtocolStateError
from .primitives import (
    KeyPair,
    SuiteParams,
    Variant,
    aead_open,
    aead_seal,
    bit_bytes,
    dh_keygen,
    dh_shared,
    otp_decrypt,
    otp_encrypt,
)
from .wire import Kind, Msg1, Msg2, Msg3, Msg4, decode, encode


class Role(str, Enum):
    INITIATOR = "initiator"
    RESPONDER = "responder"


class Status(str, Enum):
    RUNNING = "running"
    ACCEPTED = "accepted"
    TERMINATED = "terminated"
    REJECTED = "rejected"


@dataclass(eq=False)
class SessionState:
    suite: SuiteParams
    role: Role
    identity: bytes
    static: KeyPair
    peerid: bytes | None = None
    status: Status = Status.RUNNING
    sid: tuple[bytes, bytes, bytes, bytes] | None = None
    ephemeral: KeyPair | None = None
    c_i: bytes | None = None
    c_r: bytes | None = None
    peer_ephemeral: bytes | None = None
    # m1 is the transmitted message; m2 and m3 are plaintexts
    m1: bytes | None = None
    m2: bytes | None = None
    m3: bytes | None = None
    m3_prime: bytes | None = None
    ead1: bytes = b""
    ead2: bytes = b""
    ead3: bytes = b""
    ead4: bytes = b""
    peer_ead: dict[int, bytes] = field(default_factory=dict)
    transcript: ks.TranscriptState = field(default_factory=ks.TranscriptState)
    chain: ks.PrkChain = field(default_factory=ks.PrkChain)
    material: ks.DerivedMaterial = field(default_factory=ks.DerivedMaterial)
    sk: bytes | None = None
    t_acc: int = 0
    tested: bool = False
    revealed: bool = False

    @property
    def accepted(self) -> bool:
        """True once the session has reached Accepted (possibly Terminated since)."""
        return self.status in (Status.ACCEPTED, Status.TERMINATED)

    def __repr__(self):
        return (
            f"SessionState(role={self.role.value}, id={self.identity.hex()}, "
            f"status={self.status.value}, peer={self.peerid.hex() if self.peerid else None})"
        )


def _require(session: SessionState, role: Role, status: Status, ok: bool, step: str) -> None:
    if session.role is not role or session.status is not status or not ok:
        raise ProtocolStateError(f"{step} not allowed on {session!r}")


def _reject(session: SessionState) -> None:
    session.status = Status.REJECTED
    return None


def _dh(session: SessionState, secret: bytes, public: bytes) -> bytes:
    return dh_shared(secret, public, session.suite.curve)


def _finish(session: SessionState, th4: bytes) -> None:
    session.transcript.th4 = th4
    session.chain.prk_out = session.sk = ks.derive_session_key(session.chain.prk4e3m, th4)
    session.status = Status.TERMINATED


def new_session(
    suite: SuiteParams,
    role: Role,
    identity: bytes,
    static: KeyPair,
    peerid: bytes | None = None,
    **ead: bytes,
) -> SessionState:
    if len(identity) != suite.id_len:
        raise ValueError(f"identity labels are {suite.id_len} bytes in this suite")
    return SessionState(suite, Role(role), identity, static, peerid, **ead)


def initrun1(session: SessionState, rng: random.Random) -> bytes:
    _require(session, Role.INITIATOR, Status.RUNNING, session.m1 is None, "initrun1")
    session.ephemeral = dh_keygen(rng, session.suite)
    session.c_i = rng.randbytes(session.suite.cid_len)
    session.m1 = encode(Msg1(session.ephemeral.public, session.c_i, session.ead1))
    return session.m1


def resprun1(session: SessionState, data: bytes, rng: random.Random) -> bytes | None:
    _require(session, Role.RESPONDER, Status.RUNNING, session.sid is None, "resprun1")
    suite = session.suite
    try:
        msg = decode(data, Kind.MSG1)
    except DecodeError:
        return _reject(session)
    session.m1 = data
    session.peer_ead[1] = msg.ead1
    eph = session.ephemeral = dh_keygen(rng, suite)
    session.c_i, session.c_r = msg.c_i, rng.randbytes(suite.cid_len)
    session.peer_ephemeral = msg.x_e
    session.sid = (msg.c_i, session.c_r, msg.x_e, eph.public)
    try:
        gxy = _dh(session, eph.secret, msg.x_e)
        g_rx = _dh(session, session.static.secret, msg.x_e)
    except InvalidPoint:
        return _reject(session)

    tr, chain, mat = session.transcript, session.chain, session.material
    tr.th2 = ks.compute_th2(eph.public, session.c_r, data)
    chain.prk2e = ks.derive_prk2e(suite, tr.th2, gxy)
    lpt = 8 * (suite.id_len + bit_bytes(suite.l_mac) + len(session.ead2))
    mat.sk2, chain.salt3e2m = ks.derive_message2_material(chain.prk2e, tr.th2, lpt)
    chain.prk3e2m = ks.derive_prk3e2m(chain.salt3e2m, g_rx)
    ctx2 = ks.mac_context(session.identity, tr.th2, session.static.public, session.ead2)
    mat.t2 = ks.derive_t2(chain.prk3e2m, ctx2, suite.l_mac)
    session.m2 = session.identity + mat.t2 + session.ead2
    c2 = otp_encrypt(mat.sk2, session.m2)
    return encode(Msg2(eph.public, c2, session.c_r))


def initrun2(session: SessionState, peerpk: Mapping[bytes, bytes], data: bytes) -> bytes | None:
    """Process (Y_e, c_2, C_R), verify t_2 and produce message 3."""
    _require(
        session, Role.INITIATOR, Status.RUNNING,
        session.m1 is not None and session.sid is None, "initrun2",
    )
    suite = session.suite
    try:
        msg = decode(data, Kind.MSG2)
        gxy = _dh(session, session.ephemeral.secret, msg.y_e)
    except (DecodeError, InvalidPoint):
        return _reject(session)

    tr, chain, mat = session.transcript, session.chain, session.material
    tr.th2 = ks.compute_th2(msg.y_e, msg.c_r, session.m1)
    chain.prk2e = ks.derive_prk2e(suite, tr.th2, gxy)
    mat.sk2, chain.salt3e2m = ks.derive_message2_material(chain.prk2e, tr.th2, 8 * len(msg.c2))
    m2 = otp_decrypt(mat.sk2, msg.c2)
    id_end = suite.id_len
    tag_end = id_end + bit_bytes(suite.l_mac)
    if len(m2) < tag_end:
        return _reject(session)
    id_r, t2, ead2 = m2[:id_end], m2[id_end:tag_end], m2[tag_end:]
    y_s = peerpk.get(id_r)
    if y_s is None or (session.peerid is not None and id_r != session.peerid):
        return _reject(session)
    try:
        g_rx = _dh(session, session.ephemeral.secret, y_s)
    except InvalidPoint:
        return _reject(session)
    chain.prk3e2m = ks.derive_prk3e2m(chain.salt3e2m, g_rx)
    ctx2 = ks.mac_context(id_r, tr.th2, y_s, ead2)
    mat.t2 = ks.derive_t2(chain.prk3e2m, ctx2, suite.l_mac)
    if not hmac.compare_digest(mat.t2, t2):
        return _reject(session)

    session.m2, session.c_r, session.peer_ephemeral = m2, msg.c_r, msg.y_e
    session.peer_ead[2] = ead2
    session.sid = (session.c_i, msg.c_r, session.ephemeral.public, msg.y_e)
    tr.th3 = ks.compute_th3(tr.th2, m2)
    mat.sk3, mat.iv3, chain.salt4e3m = ks.derive_message3_material(chain.prk3e2m, tr.th3, suite)
    chain.prk4e3m = ks.derive_prk4e3m(chain.salt4e3m, _dh(session, session.static.secret, msg.y_e))
    session.peerid = id_r
    session.status = Status.ACCEPTED
    ctx3 = ks.mac_context(session.identity, tr.th3, session.static.public, session.ead3)
    mat.t3 = ks.derive_t3(chain.prk4e3m, ctx3, suite)

    if suite.variant is Variant.IMPROVED:
        session.m3 = session.identity
        session.m3_prime = mat.t3 + session.ead3
        return encode(Msg3(otp_encrypt(mat.sk3, session.m3), session.m3_prime))
    session.m3 = session.identity + mat.t3 + session.ead3
    c3 = aead_seal(mat.sk3, mat.iv3, session.m3, b"", suite.aead_tag)
    _finish(session, ks.compute_th4(tr.th3, session.m3))
    return encode(Msg3(c3))


def resprun2(session: SessionState, peerpk: Mapping[bytes, bytes], data: bytes) -> bytes | None:
    """Process message 3. Returns message 4 in the improved variant, else ``None``."""
    _require(session, Role.RESPONDER, Status.RUNNING, session.sid is not None, "resprun2")
    suite = session.suite
    improved = suite.variant is Variant.IMPROVED
    try:
        msg = decode(data, Kind.MSG3)
    except DecodeError:
        return _reject(session)
    if (msg.m3_prime is not None) != improved:
        return _reject(session)

    tr, chain, mat = session.transcript, session.chain, session.material
    tr.th3 = ks.compute_th3(tr.th2, session.m2)
    mat.sk3, mat.iv3, chain.salt4e3m = ks.derive_message3_material(chain.prk3e2m, tr.th3, suite)
    tag_len = bit_bytes(suite.t3_bits)
    if improved:
        if len(msg.c3) != suite.id_len or len(msg.m3_prime) < tag_len:
            return _reject(session)
        m3 = otp_decrypt(mat.sk3, msg.c3)
        id_i, t3, ead3 = m3, msg.m3_prime[:tag_len], msg.m3_prime[tag_len:]
    else:
        m3 = aead_open(mat.sk3, mat.iv3, msg.c3, b"", suite.aead_tag)
        if m3 is None or len(m3) < suite.id_len + tag_len:
            return _reject(session)
        id_i = m3[: suite.id_len]
        t3 = m3[suite.id_len : suite.id_len + tag_len]
        ead3 = m3[suite.id_len + tag_len :]
    x_s = peerpk.get(id_i)
    if x_s is None or (session.peerid is not None and id_i != session.peerid):
        return _reject(session)
    try:
        g_iy = _dh(session, session.ephemeral.secret, x_s)
    except InvalidPoint:
        return _reject(session)
    chain.prk4e3m = ks.derive_prk4e3m(chain.salt4e3m, g_iy)
    session.peerid = id_i
    session.status = Status.ACCEPTED
    ctx3 = ks.mac_context(id_i, tr.th3, x_s, ead3)
    mat.t3 = ks.derive_t3(chain.prk4e3m, ctx3, suite)
    if not hmac.compare_digest(mat.t3, t3):
        return _reject(session)

    session.m3, session.m3_prime = m3, msg.m3_prime
    session.peer_ead[3] = ead3
    if not improved:
        _finish(session, ks.compute_th4(tr.th3, m3))
        return None
    th4 = ks.compute_th4(tr.th3, m3, msg.m3_prime)
    mat.sk4, mat.iv4 = ks.derive_message4_material(chain.prk4e3m, th4, suite)
    c4 = aead_seal(mat.sk4, mat.iv4, b"", session.ead4, suite.aead_tag)
    _finish(session, th4)
    return encode(Msg4(c4, session.ead4))


def initrun3(session: SessionState, data: bytes) -> None:
    """Verify message 4 (improved variant); the session key is released only on success."""
    _require(
        session, Role.INITIATOR, Status.ACCEPTED,
        session.suite.variant is Variant.IMPROVED and session.sk is None, "initrun3",
    )
    suite = session.suite
    try:
        msg = decode(data, Kind.MSG4)
    except DecodeError:
        return _reject(session)
    tr, chain, mat = session.transcript, session.chain, session.material
    th4 = ks.compute_th4(tr.th3, session.m3, session.m3_prime)
    mat.sk4, mat.iv4 = ks.derive_message4_material(chain.prk4e3m, th4, suite)
    if aead_open(mat.sk4, mat.iv4, msg.c4, msg.m4_prime, suite.aead_tag) != b"":
        return _reject(session)
    session.peer_ead[4] = msg.m4_prime
    _finish(session, th4)
    return None


def activate(
    suite: SuiteParams,
    role: Role,
    identity: bytes,
    static: KeyPair,
    peerid: bytes | None,
    rng: random.Random,
    **ead: bytes,
) -> tuple[SessionState, bytes | None]:
    session = new_session(suite, role, identity, static, peerid, **ead)
    out = initrun1(session, rng) if session.role is Role.INITIATOR else None
    return session, out


def run(session: SessionState, peerpk: Mapping[bytes, bytes], data: bytes, rng: random.Random) -> bytes | None:
    """Deliver ``data`` to ``session`` and return its reply, if any.

    Sessions that are finished or rejected ignore input and return ``None``.
    """
    if session.status in (Status.REJECTED, Status.TERMINATED):
        return None
    if session.status is Status.ACCEPTED:
        if session.role is Role.INITIATOR and session.suite.variant is Variant.IMPROVED:
            return initrun3(session, data)
        return None
    if session.role is Role.INITIATOR:
        if session.m1 is None:
            return initrun1(session, rng)
        return initrun2(session, peerpk, data)
    if session.sid is None:
        return resprun1(session, data, rng)
    return resprun2(session, peerpk, data)


def export(session: SessionState, label: int, length_bits: int, context: bytes = b"") -> bytes:
    if session.status is not Status.TERMINATED:
        raise ProtocolStateError("exporter needs a terminated session")
    return ks.exporter(session.chain.prk4e3m, session.transcript.th4, label, length_bits, context)


def update_key(session: SessionState, nonce: bytes) -> bytes:
    """Replace PRK_4e3m with a key-updated value and return it."""
    if session.status is not Status.TERMINATED:
        raise ProtocolStateError("key update needs a terminated session")
    session.chain.prk4e3m = ks.key_update(session.chain.prk4e3m, nonce)
    return session.chain.prk4e3m


@dataclass
class Handshake:
    initiator: SessionState
    responder: SessionState
    flows: list[bytes]

    @property
    def agreed(self) -> bool:
        i, r = self.initiator, self.responder
        return (
            i.status is r.status is Status.TERMINATED
            and i.sk == r.sk
            and i.sid == r.sid
            and i.peerid == r.identity
            and r.peerid == i.identity
        )


def run_handshake(
    rng: random.Random,
    suite: SuiteParams,
    responder_suite: SuiteParams | None = None,
    *,
    initiator_static: KeyPair | None = None,
    responder_static: KeyPair | None = None,
    id_i: bytes | None = None,
    id_r: bytes | None = None,
    initiator_ead: Mapping[str, bytes] | None = None,
    responder_ead: Mapping[str, bytes] | None = None,
) -> Handshake:
    """Relay one handshake between two honest parties, stopping at the first rejection."""
    responder_suite = responder_suite or suite
    id_i = id_i if id_i is not None else (1).to_bytes(suite.id_len, "big")
    id_r = id_r if id_r is not None else (2).to_bytes(responder_suite.id_len, "big")
    x_s = initiator_static or dh_keygen(rng, suite)
    y_s = responder_static or dh_keygen(rng, responder_suite)
    peerpk = {id_i: x_s.public, id_r: y_s.public}
    init = new_session(suite, Role.INITIATOR, id_i, x_s, id_r, **(initiator_ead or {}))
    resp = new_session(responder_suite, Role.RESPONDER, id_r, y_s, id_i, **(responder_ead or {}))

    flows = [initrun1(init, rng)]
    parties = (resp, init)
    turn = 0
    while flows[-1] is not None:
        reply = run(parties[turn % 2], peerpk, flows[-1], rng)
        if reply is None:
            break
        flows.append(reply)
        turn += 1
    return Handshake(init, resp, flows)
