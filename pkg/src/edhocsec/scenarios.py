"""Named game scenarios replayed by the ``game`` CLI command and the tests."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .attacks import (
    INITIATOR,
    RESPONDER,
    forge_initiator_trial,
    forge_responder_trial,
    identities_in_clear,
)
from .game import GameState, honest_schedule
from .primitives import SuiteParams, dh_keygen, dh_shared
from .protocol import Role, Status


@dataclass
class ScenarioResult:
    name: str
    game: GameState
    trials: int = 1
    details: dict = field(default_factory=dict)

    @property
    def sound(self) -> bool:
        return self.game.sound()

    @property
    def fresh(self) -> bool:
        return self.game.fresh()

    @property
    def explicit_auth(self) -> bool:
        return self.game.finalize_explicit_auth()

    def summary(self) -> str:
        extra = "".join(f" {k}={v}" for k, v in self.details.items())
        return (
            f"scenario={self.name} trials={self.trials} sound={self.sound} "
            f"fresh={self.fresh} explicit_auth={self.explicit_auth}{extra}"
        )


def _pair_game(suite: SuiteParams, rng: random.Random) -> GameState:
    game = GameState(suite, rng)
    game.new_user()
    game.new_user()
    return game


def _relay(game: GameState, msg: bytes | None) -> list[bytes]:
    """Finish the handshake between sessions (1, 0) and (2, 0), starting from message 1."""
    flows = []
    dest, src = (RESPONDER, 0), (INITIATOR, 0)
    while msg is not None:
        flows.append(msg)
        msg = game.send(*dest, msg)
        dest, src = src, dest
    return flows


def honest(suite: SuiteParams, rng: random.Random, n: int = 10, users: int = 4) -> ScenarioResult:
    game = GameState(suite, rng)
    for _ in range(users):
        game.new_user()
    honest_schedule(game, n, rng)
    done = sum(s.status is Status.TERMINATED for s in game.sessions.values())
    return ScenarioResult(f"honest-{n}", game, n, {"terminated": done})


def _forge(suite: SuiteParams, rng: random.Random, responder_side: bool) -> ScenarioResult:
    template = _pair_game(suite, rng)
    eph = dh_keygen(rng, suite)
    g_rx = dh_shared(eph.secret, template.users[RESPONDER].keypair.public, suite.curve)
    bound = 10 * 2 ** (suite.l_mac if responder_side else suite.t3_bits)
    victim = (INITIATOR, 0) if responder_side else (RESPONDER, 0)
    for trial in range(1, bound + 1):
        if responder_side:
            game = forge_responder_trial(template, eph, rng)
        else:
            game, _ = forge_initiator_trial(template, eph, g_rx, rng)
        if game.sessions[victim].status is Status.TERMINATED:
            break
    status = game.sessions[victim].status.value
    name = "forge-responder" if responder_side else "forge-initiator"
    return ScenarioResult(name, game, trial, {"victim": status})


def forge_responder(suite: SuiteParams, rng: random.Random) -> ScenarioResult:
    return _forge(suite, rng, responder_side=True)


def forge_initiator(suite: SuiteParams, rng: random.Random) -> ScenarioResult:
    return _forge(suite, rng, responder_side=False)


def _corrupt(suite: SuiteParams, rng: random.Random, before: bool) -> ScenarioResult:
    game = _pair_game(suite, rng)
    game.send(RESPONDER, 0, (INITIATOR, Role.RESPONDER))
    m1 = game.send(INITIATOR, 0, (RESPONDER, Role.INITIATOR))
    if before:
        game.rev_ltk(RESPONDER)
    _relay(game, m1)
    if not before:
        game.rev_ltk(RESPONDER)
    game.test(INITIATOR, 0)
    name = "corrupt-before-accept" if before else "corrupt-after-accept"
    init = game.sessions[(INITIATOR, 0)]
    return ScenarioResult(name, game, 1, {"t_acc": init.t_acc, "revltk": int(game.users[RESPONDER].revltk)})


def corrupt_after_accept(suite: SuiteParams, rng: random.Random) -> ScenarioResult:
    return _corrupt(suite, rng, before=False)


def corrupt_before_accept(suite: SuiteParams, rng: random.Random) -> ScenarioResult:
    return _corrupt(suite, rng, before=True)


def identity_passive(suite: SuiteParams, rng: random.Random) -> ScenarioResult:
    """Eavesdrop on an honest run and look for identity labels in the traffic."""
    game = _pair_game(suite, rng)
    game.send(RESPONDER, 0, (INITIATOR, Role.RESPONDER))
    flows = _relay(game, game.send(INITIATOR, 0, (RESPONDER, Role.INITIATOR)))
    seen = identities_in_clear(flows, [game.identity(INITIATOR), game.identity(RESPONDER)])
    exposed = sum(len(v) for v in seen.values())
    return ScenarioResult("identity-passive", game, 1, {"flows": len(flows), "exposed": exposed})


def identity_active(suite: SuiteParams, rng: random.Random, trials: int = 64) -> ScenarioResult:
    """Inject adversarial message 2 and check whether the initiator reveals anything."""
    template = _pair_game(suite, rng)
    eph = dh_keygen(rng, suite)
    replies = 0
    for _ in range(trials):
        game = forge_responder_trial(template, eph, rng)
        replies += game.sessions[(INITIATOR, 0)].t_acc > 0
    return ScenarioResult("identity-active", game, trials, {"message3_sent": replies})


SCENARIOS = {
    "honest-N": honest,
    "forge-responder": forge_responder,
    "forge-initiator": forge_initiator,
    "corrupt-after-accept": corrupt_after_accept,
    "corrupt-before-accept": corrupt_before_accept,
    "identity-passive": identity_passive,
    "identity-active": identity_active,
}


def run_scenario(name: str, suite: SuiteParams, seed: int = 0, n: int = 10) -> ScenarioResult:
    if name.startswith("honest-") and name != "honest-N":
        n = int(name.split("-", 1)[1])
        name = "honest-N"
    try:
        scenario = SCENARIOS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}") from None
    rng = random.Random(seed)
    if scenario is honest:
        return honest(suite, rng, n)
    return scenario(suite, rng)
