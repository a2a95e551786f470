"""Security-game bookkeeping: users, sessions, adversary queries and predicates.

The adversary drives a :class:`GameState` through :meth:`~GameState.send`,
:meth:`~GameState.rev_ltk`, :meth:`~GameState.rev_sk` and
:meth:`~GameState.test`, then the predicates decide whether it won. Every
query appends one line to :attr:`GameState.trace`.
"""
from __future__ import annotations

import math
import random
from collections import defaultdict
from dataclasses import dataclass

from . import protocol
from .primitives import KeyPair, SuiteParams, dh_keygen
from .protocol import Role, SessionState, Status

NEVER = math.inf


@dataclass
class User:
    identity: bytes
    keypair: KeyPair
    revltk: float = NEVER


def _fmt_time(t: float) -> str:
    return "inf" if t == NEVER else str(int(t))


class GameState:
    """Key-privacy / explicit-authentication game over one cipher suite."""

    def __init__(self, suite: SuiteParams, rng: random.Random | None = None, seed: int | None = None):
        self.suite = suite
        self.rng = rng if rng is not None else random.Random(seed)
        self.time = 0
        self.users: dict[int, User] = {}
        self.peerpk: dict[bytes, bytes] = {}
        self._by_identity: dict[bytes, int] = {}
        self.sessions: dict[tuple[int, int], SessionState] = {}
        self.tested: list[SessionState] = []
        self.b = self.rng.getrandbits(1)
        self.trace: list[str] = []

    # -- users ----------------------------------------------------------

    def identity(self, u: int) -> bytes:
        return u.to_bytes(self.suite.id_len, "big")

    def _register(self, keypair: KeyPair) -> int:
        u = len(self.users) + 1
        user = User(self.identity(u), keypair)
        self.users[u] = user
        self.peerpk[user.identity] = keypair.public
        self._by_identity[user.identity] = u
        return u

    def new_user(self) -> bytes:
        u = self._register(dh_keygen(self.rng, self.suite))
        self.trace.append(f"NewUser u={u} time={self.time}")
        return self.users[u].keypair.public

    def add_user(self, keypair: KeyPair) -> int:
        """Register a pre-generated key pair; returns the new user index."""
        u = self._register(keypair)
        self.trace.append(f"NewUser u={u} time={self.time}")
        return u

    def fork(self, rng: random.Random | None = None) -> GameState:
        """A fresh game with the same registered users and no sessions."""
        game = GameState.__new__(GameState)
        game.suite = self.suite
        game.rng = rng if rng is not None else self.rng
        game.time = 0
        game.users = {u: User(user.identity, user.keypair) for u, user in self.users.items()}
        game.peerpk = dict(self.peerpk)
        game._by_identity = dict(self._by_identity)
        game.sessions = {}
        game.tested = []
        game.b = game.rng.getrandbits(1)
        game.trace = []
        return game

    def revltk_of(self, identity: bytes | None) -> float:
        u = self._by_identity.get(identity)
        return NEVER if u is None else self.users[u].revltk

    # -- queries --------------------------------------------------------

    def send(self, u: int, i: int, m):
        """Activate session (u, i) with ``m = (peer, role)`` or deliver bytes to it."""
        user = self.users[u]
        session = self.sessions.get((u, i))
        if session is None:
            peer, role = m
            session, out = protocol.activate(
                self.suite, Role(role), user.identity, user.keypair, self.identity(peer), self.rng
            )
            self.sessions[(u, i)] = session
            before = "-"
        else:
            before = session.status.value
            out = protocol.run(session, self.peerpk, m, self.rng)
        if session.t_acc == 0 and session.accepted:
            self.time += 1
            session.t_acc = self.time
        self.trace.append(f"Send u={u} i={i} time={self.time} {before}->{session.status.value}")
        return out

    def rev_ltk(self, u: int) -> bytes:
        user = self.users[u]
        if user.revltk == NEVER:
            self.time += 1
            user.revltk = self.time
        self.trace.append(f"RevLTK u={u} time={self.time} revltk={_fmt_time(user.revltk)}")
        return user.keypair.secret

    def rev_sk(self, u: int, i: int) -> bytes | None:
        session = self.sessions.get((u, i))
        ok = session is not None and session.accepted and session.sk is not None
        if ok:
            session.revealed = True
        self.trace.append(f"RevSK u={u} i={i} time={self.time} {'ok' if ok else 'bot'}")
        return session.sk if ok else None

    def test(self, u: int, i: int) -> bytes | None:
        session = self.sessions.get((u, i))
        if session is None or not session.accepted or session.sk is None or session.tested:
            self.trace.append(f"Test u={u} i={i} time={self.time} bot")
            return None
        session.tested = True
        self.tested.append(session)
        real, fake = session.sk, self.rng.randbytes(len(session.sk))
        self.trace.append(f"Test u={u} i={i} time={self.time} ok")
        return fake if self.b else real

    # -- predicates -----------------------------------------------------

    def _by_sid(self) -> dict[tuple, list[SessionState]]:
        groups = defaultdict(list)
        for s in self.sessions.values():
            if s.sid is not None:
                groups[s.sid].append(s)
        return groups

    def sound(self) -> bool:
        """At most two sessions per sid, and accepted partners agree with each other."""
        for group in self._by_sid().values():
            if len(group) > 2:
                return False
            if len(group) < 2:
                continue
            a, b = group
            if not (a.accepted and b.accepted):
                continue
            if a.role is b.role or a.peerid != b.identity or b.peerid != a.identity:
                return False
            if a.sk is not None and b.sk is not None and a.sk != b.sk:
                return False
        return True

    def fresh(self) -> bool:
        groups = self._by_sid()
        for s in self.tested:
            if s.revealed or self.revltk_of(s.peerid) < s.t_acc:
                return False
            for other in groups.get(s.sid, ()):
                if other is not s and (other.tested or other.revealed):
                    return False
        return True

    def finalize_kp(self, b_guess: int) -> bool:
        if not self.sound():
            return True
        if not self.fresh():
            b_guess = 0
        return self.b == b_guess

    def finalize_explicit_auth(self) -> bool:
        """Every terminated session with an uncorrupted peer has an accepted partner."""
        groups = self._by_sid()
        for s in self.sessions.values():
            if s.status is not Status.TERMINATED or not s.t_acc < self.revltk_of(s.peerid):
                continue
            if not any(
                p is not s
                and p.identity == s.peerid
                and p.peerid == s.identity
                and p.role is not s.role
                and p.accepted
                for p in groups.get(s.sid, ())
            ):
                return False
        return True


def honest_schedule(game: GameState, n_sessions: int, rng: random.Random | None = None) -> list[tuple[int, int, int, int]]:
    """Run ``n_sessions`` honest handshakes between random user pairs, randomly interleaved.

    Needs at least two users. Returns the (initiator u, i, responder v, j) pairs.
    """
    rng = rng or game.rng
    if len(game.users) < 2:
        raise ValueError("need at least two users")
    counters: dict[int, int] = defaultdict(int)
    for u, i in game.sessions:
        counters[u] = max(counters[u], i + 1)

    pairs = []
    pending = []  # (destination (u, i), message)
    for _ in range(n_sessions):
        u, v = rng.sample(sorted(game.users), 2)
        i, j = counters[u], counters[v]
        counters[u] += 1
        counters[v] += 1
        game.send(v, j, (u, Role.RESPONDER))
        m1 = game.send(u, i, (v, Role.INITIATOR))
        pairs.append((u, i, v, j))
        pending.append(((v, j), (u, i), m1))
    while pending:
        dest, src, msg = pending.pop(rng.randrange(len(pending)))
        reply = game.send(*dest, msg)
        if reply is not None:
            pending.append((src, dest, reply))
    return pairs
