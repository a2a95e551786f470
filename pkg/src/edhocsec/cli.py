"""Command-line front end: ``edhocsec {handshake,attack,game}``.

Everything is in-process and deterministic for a given seed. Keys are only
ever shown as 4-byte SHA-256 fingerprints.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from .attacks import Target, attack_initiator_auth, attack_responder_auth
from .errors import ParameterError
from .primitives import SuiteParams, Variant, sha256
from .protocol import run_handshake
from .scenarios import SCENARIOS, run_scenario

MAX_ATTACK_TAG_BITS = 20


@dataclass
class RunConfig:
    variant: str = "baseline"
    curve: str = "x25519"
    lmac: int = 64
    lsec: int = 128
    nl: int = 32
    seed: int = 0
    trials: int = 1000
    out: str | None = None
    target: str = Target.RESPONDER_AUTH.value
    scenario: str = "honest-N"
    peer_variant: str | None = None

    def suite(self, variant: str | None = None) -> SuiteParams:
        return SuiteParams(
            curve=self.curve, variant=variant or self.variant,
            l_mac=self.lmac, l_sec=self.lsec, nl=self.nl,
        )


def fingerprint(key: bytes | None) -> str:
    return "-" if key is None else sha256(key)[:4].hex()


def _emit(config: RunConfig, lines: list[str]) -> None:
    if config.out:
        Path(config.out).write_text("".join(line + "\n" for line in lines))


def cmd_handshake(config: RunConfig) -> int:
    suite = config.suite()
    peer = config.suite(config.peer_variant) if config.peer_variant else suite
    hs = run_handshake(random.Random(config.seed), suite, peer)
    names = ["m1", "m2", "m3", "m4"]
    records = []
    for k, flow in enumerate(hs.flows):
        print(f"flow {k + 1} ({names[k]}): {len(flow)} bytes")
        records.append(f"flow={k + 1} bytes={len(flow)}")
    for party in (hs.initiator, hs.responder):
        chain = party.chain
        print(
            f"{party.role.value:9} status={party.status.value} prk2e={fingerprint(chain.prk2e)} "
            f"prk3e2m={fingerprint(chain.prk3e2m)} prk4e3m={fingerprint(chain.prk4e3m)} "
            f"sk={fingerprint(party.sk)}"
        )
    verdict = "SK match" if hs.agreed else "handshake rejected"
    print(verdict)
    records.append(f"verdict={'match' if hs.agreed else 'rejected'} variant={suite.variant.value}")
    _emit(config, records)
    return 0 if hs.agreed else 1


def cmd_attack(config: RunConfig) -> int:
    suite = config.suite()
    target = Target(config.target)
    if target is Target.INITIATOR_AUTH:
        l_tag = suite.t3_bits
        attack = attack_initiator_auth
    else:
        l_tag = suite.l_mac
        attack = attack_responder_auth
    if l_tag > MAX_ATTACK_TAG_BITS:
        raise ParameterError(
            f"a {l_tag}-bit tag needs about 2**{l_tag} trials per success; "
            f"campaigns are limited to {MAX_ATTACK_TAG_BITS}-bit tags"
        )
    report = attack(suite, config.trials, config.seed)
    print(
        f"{target.value} against {suite.variant.value}: {report.successes}/{report.trials} "
        f"forgeries (rate {report.empirical_rate:.6f}, expected {report.expected_rate:.6f}, "
        f"z {report.z_score:+.2f}); victim terminated {report.terminated} times"
    )
    print(report.to_record())
    _emit(config, [report.to_record()])
    return 0 if report.consistent() else 1


def cmd_game(config: RunConfig) -> int:
    result = run_scenario(config.scenario, config.suite(), config.seed, n=config.trials)
    for line in result.game.trace:
        print(line)
    print(result.summary())
    _emit(config, result.game.trace + [result.summary()])
    return 0


COMMANDS = {"handshake": cmd_handshake, "attack": cmd_attack, "game": cmd_game}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file whose keys are flag names")
    common.add_argument("--variant", choices=[v.value for v in Variant])
    common.add_argument("--curve", choices=["x25519", "p256"])
    common.add_argument("--lmac", type=int, help="t_2 (and baseline t_3) length in bits")
    common.add_argument("--lsec", type=int, help="improved-variant t_3 length in bits")
    common.add_argument("--nl", type=int, help="connection identifier length in bits")
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--out", help="write machine-readable records here")

    parser = argparse.ArgumentParser(prog="edhocsec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    hs = sub.add_parser("handshake", parents=[common], help="run one honest handshake")
    hs.add_argument("--peer-variant", choices=[v.value for v in Variant], help="responder variant, if different")
    at = sub.add_parser("attack", parents=[common], help="run a tag-forgery campaign")
    at.add_argument("--target", choices=[t.value for t in Target])
    gm = sub.add_parser("game", parents=[common], help="replay a security-game scenario")
    gm.add_argument("--scenario", help=f"one of {', '.join(SCENARIOS)} (honest-N also as honest-<n>)")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config is not None:
        values.update(json.loads(args.config.read_text()))
    names = {f.name for f in fields(RunConfig)}
    unknown = set(values) - names
    if unknown:
        raise ParameterError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for name in names:
        value = getattr(args, name, None)
        if value is not None:
            values[name] = value
    return RunConfig(**values)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args)
        config.suite()
        return COMMANDS[args.command](config)
    except (ParameterError, KeyError, ValueError) as exc:
        print(f"edhocsec: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
