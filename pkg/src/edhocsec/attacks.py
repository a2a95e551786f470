"""Tag-guessing forgeries against responder and initiator authentication.

Each campaign runs independent trials against honest victims inside a
:class:`~edhocsec.game.GameState`. The adversary behaves exactly like a
protocol party except for the one value it cannot compute, the MAC tag, which
it guesses uniformly at random. Victims draw fresh ephemerals every trial; the
adversary keeps a single ephemeral for the whole campaign, which is its own
choice and does not change the per-trial success probability.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum

from . import key_schedule as ks
from .game import GameState
from .primitives import (
    SuiteParams,
    Variant,
    aead_seal,
    bit_bytes,
    dh_keygen,
    dh_shared,
    otp_decrypt,
    otp_encrypt,
    truncate_bits,
)
from .protocol import Role, Status, run_handshake
from .wire import Kind, Msg1, Msg2, Msg3, Msg4, decode, encode

Z_THRESHOLD = 4.0
INITIATOR, RESPONDER = 1, 2


class Target(str, Enum):
    RESPONDER_AUTH = "responder-auth"
    INITIATOR_AUTH = "initiator-auth"


@dataclass(frozen=True)
class AttackReport:
    """Outcome of a forgery campaign.

    ``successes`` counts trials that reached the attack's goal: the victim
    initiator accepting a forged message 2, or the victim responder
    terminating on a forged message 3. ``accepted`` and ``terminated`` count
    how often the victim reached those states; ``auth_broken`` counts trials after which the
    explicit-authentication predicate failed.
    """

    target: Target
    variant: Variant
    l_tag: int
    trials: int
    successes: int
    accepted: int = 0
    terminated: int = 0
    auth_broken: int = 0
    unsound: int = 0
    sk_matches: int = 0
    seed: int | None = field(default=None, compare=False)

    @property
    def expected_rate(self) -> float:
        return 2.0 ** -self.l_tag

    @property
    def empirical_rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    @property
    def sigma(self) -> float:
        p = self.expected_rate
        return math.sqrt(self.trials * p * (1 - p))

    @property
    def z_score(self) -> float:
        mean = self.trials * self.expected_rate
        return (self.successes - mean) / self.sigma if self.sigma else 0.0

    def consistent(self, threshold: float = Z_THRESHOLD) -> bool:
        return abs(self.z_score) <= threshold

    def to_record(self) -> str:
        return (
            f"target={self.target.value} variant={self.variant.value} l_tag={self.l_tag} "
            f"trials={self.trials} successes={self.successes} rate={self.empirical_rate:.6g} "
            f"expected={self.expected_rate:.6g} z={self.z_score:+.3f} accepted={self.accepted} "
            f"terminated={self.terminated} auth_broken={self.auth_broken} "
            f"unsound={self.unsound} sk_matches={self.sk_matches}"
        )


def _guess(rng: random.Random, bits: int) -> bytes:
    return truncate_bits(rng.randbytes(bit_bytes(bits)), bits)


def _victims(suite: SuiteParams, rng: random.Random) -> GameState:
    game = GameState(suite, rng)
    game.new_user()  # INITIATOR
    game.new_user()  # RESPONDER
    return game


def forge_responder_trial(template: GameState, adversary_eph, rng: random.Random) -> GameState:
    """One responder impersonation against a fresh honest initiator session.

    The adversary answers m_1 with its own ephemeral, so it derives PRK_2e and
    sk_2 correctly, but t_2 is a random guess because PRK_3e2m needs y_s.
    In the four-message variant it then has to guess the message-4 tag too.
    """
    suite = template.suite
    game = template.fork(rng)
    m1 = game.send(INITIATOR, 0, (RESPONDER, Role.INITIATOR))
    x_e = decode(m1, Kind.MSG1).x_e
    c_r = rng.randbytes(suite.cid_len)
    th2 = ks.compute_th2(adversary_eph.public, c_r, m1)
    prk2e = ks.derive_prk2e(suite, th2, dh_shared(adversary_eph.secret, x_e, suite.curve))
    m2 = game.identity(RESPONDER) + _guess(rng, suite.l_mac)
    sk2, _ = ks.derive_message2_material(prk2e, th2, 8 * len(m2))
    msg3 = game.send(INITIATOR, 0, encode(Msg2(adversary_eph.public, otp_encrypt(sk2, m2), c_r)))
    if msg3 is not None and suite.variant is Variant.IMPROVED:
        game.send(INITIATOR, 0, encode(Msg4(_guess(rng, suite.aead_tag))))
    return game


def forge_initiator_trial(template: GameState, adversary_eph, g_rx: bytes, rng: random.Random) -> tuple[GameState, bytes | None]:
    """One initiator impersonation against a fresh honest responder session.

    The adversary runs message 1 with its own ephemeral, so it can derive
    PRK_3e2m and sk_3 from the responder's reply; t_3 is guessed. Returns the
    game and the adversary's best session-key candidate, which substitutes the
    DH value it cannot compute with one it can.
    """
    suite = template.suite
    game = template.fork(rng)
    game.send(RESPONDER, 0, (INITIATOR, Role.RESPONDER))
    m1 = encode(Msg1(adversary_eph.public, rng.randbytes(suite.cid_len)))
    reply = game.send(RESPONDER, 0, m1)
    msg2 = decode(reply, Kind.MSG2)
    gxy = dh_shared(adversary_eph.secret, msg2.y_e, suite.curve)
    th2 = ks.compute_th2(msg2.y_e, msg2.c_r, m1)
    prk2e = ks.derive_prk2e(suite, th2, gxy)
    sk2, salt3e2m = ks.derive_message2_material(prk2e, th2, 8 * len(msg2.c2))
    m2 = otp_decrypt(sk2, msg2.c2)
    th3 = ks.compute_th3(th2, m2)
    prk3e2m = ks.derive_prk3e2m(salt3e2m, g_rx)
    sk3, iv3, salt4e3m = ks.derive_message3_material(prk3e2m, th3, suite)

    id_i = game.identity(INITIATOR)
    t3 = _guess(rng, suite.t3_bits)
    if suite.variant is Variant.IMPROVED:
        m3, m3_prime = id_i, t3
        msg3 = Msg3(otp_encrypt(sk3, m3), m3_prime)
        th4 = ks.compute_th4(th3, m3, m3_prime)
    else:
        m3 = id_i + t3
        msg3 = Msg3(aead_seal(sk3, iv3, m3, b"", suite.aead_tag))
        th4 = ks.compute_th4(th3, m3)
    game.send(RESPONDER, 0, encode(msg3))
    if game.sessions[(RESPONDER, 0)].status is not Status.TERMINATED:
        return game, None
    candidate = ks.derive_session_key(ks.derive_prk4e3m(salt4e3m, gxy), th4)
    return game, candidate


def _campaign(target: Target, suite: SuiteParams, trials: int, seed: int) -> AttackReport:
    rng = random.Random(seed)
    template = _victims(suite, rng)
    adversary_eph = dh_keygen(rng, suite)
    victim = (INITIATOR, 0) if target is Target.RESPONDER_AUTH else (RESPONDER, 0)
    if target is Target.INITIATOR_AUTH:
        y_s = template.users[RESPONDER].keypair.public
        g_rx = dh_shared(adversary_eph.secret, y_s, suite.curve)

    successes = accepted = terminated = auth_broken = unsound = sk_matches = 0
    for _ in range(trials):
        if target is Target.RESPONDER_AUTH:
            game = forge_responder_trial(template, adversary_eph, rng)
            candidate = None
        else:
            game, candidate = forge_initiator_trial(template, adversary_eph, g_rx, rng)
        session = game.sessions[victim]
        reached = session.t_acc > 0
        done = session.status is Status.TERMINATED
        accepted += reached
        terminated += done
        successes += reached if target is Target.RESPONDER_AUTH else done
        if reached:
            auth_broken += not game.finalize_explicit_auth()
            unsound += not game.sound()
            sk_matches += candidate is not None and candidate == session.sk
    return AttackReport(
        target, suite.variant,
        suite.l_mac if target is Target.RESPONDER_AUTH else suite.t3_bits,
        trials, successes, accepted, terminated, auth_broken, unsound, sk_matches, seed,
    )


def attack_responder_auth(suite: SuiteParams, trials: int, seed: int = 0) -> AttackReport:
    """Guess t_2 to make an honest initiator accept a responder that never took part.

    ``successes`` counts initiator acceptances (rate 2**-l_mac); in the
    improved variant ``terminated`` additionally requires a guessed c_4 tag.
    """
    return _campaign(Target.RESPONDER_AUTH, suite, trials, seed)


def attack_initiator_auth(suite: SuiteParams, trials: int, seed: int = 0) -> AttackReport:
    """Guess t_3 to make an honest responder terminate with an absent initiator."""
    return _campaign(Target.INITIATOR_AUTH, suite, trials, seed)


def attack_initiator_auth_improved(suite: SuiteParams, trials: int, seed: int = 0) -> AttackReport:
    if suite.variant is not Variant.IMPROVED:
        raise ValueError("this campaign targets the improved variant")
    return _campaign(Target.INITIATOR_AUTH, suite, trials, seed)


@dataclass(frozen=True)
class WireCost:
    """Message-3 payload bytes (c_3 plus m'_3) and framed wire bytes per variant."""

    baseline_payload: int
    improved_payload: int
    baseline_framed: int
    improved_framed: int

    @property
    def difference(self) -> int:
        return self.improved_payload - self.baseline_payload


def _message3_payload(suite: SuiteParams, ead3: bytes, seed: int) -> tuple[int, int]:
    hs = run_handshake(random.Random(seed), suite, initiator_ead={"ead3": ead3})
    if not hs.agreed:
        raise RuntimeError(f"honest handshake failed for {suite}")
    framed = hs.flows[2]
    msg3 = decode(framed, Kind.MSG3)
    return len(msg3.c3) + len(msg3.m3_prime or b""), len(framed)


def wire_cost_accounting(baseline: SuiteParams, improved: SuiteParams, ead3: bytes = b"", seed: int = 0) -> WireCost:
    """Measure message-3 sizes from real honest handshakes in both variants."""
    if baseline.variant is not Variant.BASELINE or improved.variant is not Variant.IMPROVED:
        raise ValueError("expected one baseline and one improved suite")
    if baseline.l_id != improved.l_id:
        raise ValueError("identity lengths must match across variants")
    b_payload, b_framed = _message3_payload(baseline, ead3, seed)
    i_payload, i_framed = _message3_payload(improved, ead3, seed)
    return WireCost(b_payload, i_payload, b_framed, i_framed)


def identities_in_clear(flows: list[bytes], identities: list[bytes]) -> dict[bytes, list[int]]:
    """Indices of the flows with a field that contains each identity label verbatim.

    Fields are searched after decoding, so length prefixes cannot produce
    false hits.
    """
    values = [[v for v in vars(decode(flow)).values() if v] for flow in flows]
    return {
        ident: [k for k, fields in enumerate(values) if any(ident in v for v in fields)]
        for ident in identities
    }
