"""Deterministic scenario runner.

A scenario config declares the actors (cooperatives with their members,
notaries, exchanges, providers with follower topology) and a script of
timed actions.  run_scenario builds every actor with keys derived from
the config seed, executes the script in tick order over a synchronous
ordered message fabric, and returns the event log.  The same config
always produces a byte-identical log: all randomness flows through the
seed and all time through the script ticks, so committed logs work as
golden regression files.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable

from . import crypto
from .attestation import CounterSignedAttestation, attestation_to_map
from .canonical import canonical_parse, canonical_serialize
from .cooperative import DEFAULT_QUERIES, Cooperative, MemberRecord, Status
from .crypto import KeyDirectory, KeyPair
from .dsn import Post, Provider, recovery_message
from .errors import ConfigInvalid, CoopAttestError, DecodeError, ScriptActionFailed
from .events import send_message
from .ledger import Ledger
from .notary import JurisdictionPolicy, Notary
from .travel_rule import Exchange, TransferRequest

ACTIONS = (
    "issue", "register", "transfer", "post", "revoke",
    "recover", "inject-bot-post", "tamper", "port",
)

SUBSTITUTE_MODES = ("absent", "handle")


# --- event log -----------------------------------------------------------------

@dataclass(frozen=True)
class Event:
    tick: int
    actor: str
    kind: str
    payload: dict

    def to_map(self) -> dict:
        return {"tick": self.tick, "actor": self.actor, "kind": self.kind,
                "payload": self.payload}

    @classmethod
    def from_map(cls, raw: dict) -> "Event":
        return cls(tick=raw["tick"], actor=raw["actor"], kind=raw["kind"],
                   payload=raw["payload"])


class EventLog:
    """Total-ordered scenario trace, one canonical line per event."""

    def __init__(self, events: Iterable[Event] = ()) -> None:
        self.events: list[Event] = list(events)

    def append(self, event: Event) -> None:
        self.events.append(event)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def of_kind(self, kind: str) -> list[Event]:
        return [e for e in self.events if e.kind == kind]

    def to_bytes(self) -> bytes:
        return b"".join(canonical_serialize(e.to_map()) + b"\n" for e in self.events)

    def write(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "EventLog":
        events = []
        for line in data.splitlines():
            if line.strip():
                events.append(Event.from_map(canonical_parse(line)))
        return cls(events)

    @classmethod
    def load(cls, path: str | Path) -> "EventLog":
        return cls.from_bytes(Path(path).read_bytes())


# --- config ---------------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioConfig:
    seed: bytes
    tick_limit: int
    cooperatives: tuple[dict, ...] = ()
    notaries: tuple[dict, ...] = ()
    exchanges: tuple[dict, ...] = ()
    providers: tuple[dict, ...] = ()
    script: tuple[dict, ...] = ()

    def to_map(self) -> dict:
        return {
            "seed": self.seed,
            "tick_limit": self.tick_limit,
            "cooperatives": [dict(c) for c in self.cooperatives],
            "notaries": [dict(n) for n in self.notaries],
            "exchanges": [dict(e) for e in self.exchanges],
            "providers": [dict(p) for p in self.providers],
            "script": [dict(a) for a in self.script],
        }

    @classmethod
    def from_map(cls, raw: dict) -> "ScenarioConfig":
        if not isinstance(raw, dict):
            raise DecodeError("scenario config must be a map")
        try:
            return cls(
                seed=raw["seed"],
                tick_limit=raw["tick_limit"],
                cooperatives=tuple(raw.get("cooperatives", [])),
                notaries=tuple(raw.get("notaries", [])),
                exchanges=tuple(raw.get("exchanges", [])),
                providers=tuple(raw.get("providers", [])),
                script=tuple(raw.get("script", [])),
            )
        except KeyError as exc:
            raise DecodeError(f"scenario config missing field {exc}") from None

    @classmethod
    def load(cls, path: str | Path) -> "ScenarioConfig":
        return cls.from_map(canonical_parse(Path(path).read_bytes()))

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(canonical_serialize(self.to_map()))


# --- validation -----------------------------------------------------------------

class _Validator:
    def __init__(self, config: ScenarioConfig) -> None:
        self.config = config
        self.problems: list[str] = []
        self.coops: dict[str, dict] = {}
        self.notaries: dict[str, dict] = {}
        self.exchanges: dict[str, dict] = {}
        self.providers: dict[str, dict] = {}
        self.members: dict[str, dict[str, dict]] = {}

    def problem(self, path: str, message: str) -> None:
        self.problems.append(f"{path}: {message}")

    def run(self) -> list[str]:
        config = self.config
        if not isinstance(config.seed, bytes) or not config.seed:
            self.problem("seed", "must be a non-empty byte-string")
        if not isinstance(config.tick_limit, int) or config.tick_limit < 0:
            self.problem("tick_limit", "must be a non-negative integer")
        self._collect_actors()
        self._check_script()
        return self.problems

    def _collect(self, section: str, entries: tuple[dict, ...], target: dict) -> None:
        for i, entry in enumerate(entries):
            path = f"{section}[{i}]"
            if not isinstance(entry, dict):
                self.problem(path, "must be a map")
                continue
            name = entry.get("name")
            if not isinstance(name, str) or not name:
                self.problem(f"{path}.name", "must be a non-empty string")
                continue
            if name in target:
                self.problem(f"{path}.name", f"duplicate name {name!r}")
                continue
            target[name] = entry

    def _collect_actors(self) -> None:
        self._collect("notaries", self.config.notaries, self.notaries)
        self._collect("cooperatives", self.config.cooperatives, self.coops)
        self._collect("exchanges", self.config.exchanges, self.exchanges)
        self._collect("providers", self.config.providers, self.providers)

        for i, entry in enumerate(self.config.notaries):
            path = f"notaries[{i}]"
            if not isinstance(entry.get("jurisdiction"), str):
                self.problem(f"{path}.jurisdiction", "must be a string")
            compatible = entry.get("compatible", [])
            if not isinstance(compatible, list) or not all(isinstance(c, str) for c in compatible):
                self.problem(f"{path}.compatible", "must be a list of jurisdiction codes")

        for i, entry in enumerate(self.config.cooperatives):
            path = f"cooperatives[{i}]"
            name = entry.get("name")
            legal_rep = entry.get("legal_rep")
            if legal_rep not in self.notaries:
                self.problem(f"{path}.legal_rep", f"unknown notary {legal_rep!r}")
            queries = entry.get("queries", list(DEFAULT_QUERIES))
            if not isinstance(queries, list) or not all(isinstance(q, str) for q in queries):
                self.problem(f"{path}.queries", "must be a list of derivation rule names")
            year_ticks = entry.get("year_ticks", 365)
            if not isinstance(year_ticks, int) or year_ticks <= 0:
                self.problem(f"{path}.year_ticks", "must be a positive integer")
            members = entry.get("members", [])
            if not isinstance(members, list):
                self.problem(f"{path}.members", "must be a list")
                members = []
            if isinstance(name, str):
                self.members[name] = {}
            for j, member in enumerate(members):
                member_path = f"{path}.members[{j}]"
                if not isinstance(member, dict):
                    self.problem(member_path, "must be a map")
                    continue
                member_id = member.get("member_id")
                if not isinstance(member_id, str) or not member_id:
                    self.problem(f"{member_path}.member_id", "must be a non-empty string")
                    continue
                if not isinstance(member.get("legal_identity"), str) or not member["legal_identity"]:
                    self.problem(f"{member_path}.legal_identity", "must be a non-empty string")
                if not isinstance(member.get("personal_data", {}), dict):
                    self.problem(f"{member_path}.personal_data", "must be a map")
                handle = member.get("handle")
                if handle is not None and (not isinstance(handle, str) or not handle.startswith("@")):
                    self.problem(f"{member_path}.handle", "must begin with '@'")
                if isinstance(name, str):
                    if member_id in self.members[name]:
                        self.problem(f"{member_path}.member_id", f"duplicate member {member_id!r}")
                    self.members[name][member_id] = member

        for i, entry in enumerate(self.config.exchanges):
            path = f"exchanges[{i}]"
            if not isinstance(entry.get("jurisdiction"), str):
                self.problem(f"{path}.jurisdiction", "must be a string")
            threshold = entry.get("threshold")
            if not isinstance(threshold, int) or threshold <= 0:
                self.problem(f"{path}.threshold", "must be a positive integer")

        for i, entry in enumerate(self.config.providers):
            path = f"providers[{i}]"
            if not isinstance(entry.get("jurisdiction"), str):
                self.problem(f"{path}.jurisdiction", "must be a string")
            followers = entry.get("followers", {})
            if not isinstance(followers, dict):
                self.problem(f"{path}.followers", "must map handles to provider lists")
                followers = {}
            for handle, targets in followers.items():
                if not isinstance(targets, list):
                    self.problem(f"{path}.followers[{handle}]", "must be a list of provider names")
                    continue
                for target in targets:
                    if target not in self.providers:
                        self.problem(f"{path}.followers[{handle}]",
                                     f"unknown provider {target!r}")
            if not isinstance(entry.get("prefer_local_port", False), bool):
                self.problem(f"{path}.prefer_local_port", "must be a boolean")

    def _check_script(self) -> None:
        labels: set[str] = set()
        last_tick = None
        for i, action in enumerate(self.config.script):
            path = f"script[{i}]"
            if not isinstance(action, dict):
                self.problem(path, "must be a map")
                continue
            tick = action.get("at")
            if not isinstance(tick, int) or tick < 0:
                self.problem(f"{path}.at", "must be a non-negative integer")
            else:
                if last_tick is not None and tick < last_tick:
                    self.problem(f"{path}.at", f"ticks must be non-decreasing ({tick} < {last_tick})")
                if tick > self.config.tick_limit:
                    self.problem(f"{path}.at", f"tick {tick} exceeds tick_limit {self.config.tick_limit}")
                last_tick = max(tick, last_tick) if last_tick is not None else tick
            kind = action.get("action")
            if kind not in ACTIONS:
                self.problem(f"{path}.action", f"unknown action {kind!r}")
                continue
            getattr(self, "_check_" + kind.replace("-", "_"))(path, action, labels)

    def _require_str(self, path: str, action: dict, key: str) -> str | None:
        value = action.get(key)
        if not isinstance(value, str) or not value:
            self.problem(f"{path}.{key}", "must be a non-empty string")
            return None
        return value

    def _require_label(self, path: str, action: dict, labels: set[str]) -> None:
        label = self._require_str(path, action, "attestation")
        if label is not None and label not in labels:
            self.problem(f"{path}.attestation", f"label {label!r} not issued earlier in the script")

    def _check_issue(self, path: str, action: dict, labels: set[str]) -> None:
        coop_name = self._require_str(path, action, "coop")
        if coop_name is not None and coop_name not in self.coops:
            self.problem(f"{path}.coop", f"unknown cooperative {coop_name!r}")
            coop_name = None
        member_id = self._require_str(path, action, "member")
        member = None
        if coop_name is not None and member_id is not None:
            member = self.members.get(coop_name, {}).get(member_id)
            if member is None:
                self.problem(f"{path}.member", f"unknown member {member_id!r}")
        queries = action.get("queries")
        if not isinstance(queries, list) or not queries or not all(isinstance(q, str) for q in queries):
            self.problem(f"{path}.queries", "must be a non-empty list of rule names")
        elif coop_name is not None:
            registered = self.coops[coop_name].get("queries", list(DEFAULT_QUERIES))
            for q in queries:
                if q not in registered:
                    self.problem(f"{path}.queries", f"rule {q!r} not registered at {coop_name!r}")
        mode = action.get("mode")
        if mode not in SUBSTITUTE_MODES:
            self.problem(f"{path}.mode", "must be 'absent' or 'handle'")
        elif mode == "handle" and member is not None and not member.get("handle"):
            self.problem(f"{path}.mode", f"member {member_id!r} has no handle")
        ttl = action.get("ttl")
        if not isinstance(ttl, int) or ttl <= 0:
            self.problem(f"{path}.ttl", "must be a positive integer")
        label = self._require_str(path, action, "label")
        if label is not None:
            if label in labels:
                self.problem(f"{path}.label", f"duplicate label {label!r}")
            labels.add(label)

    def _check_register(self, path: str, action: dict, labels: set[str]) -> None:
        has_exchange = "exchange" in action
        has_provider = "provider" in action
        if has_exchange == has_provider:
            self.problem(path, "register needs exactly one of 'exchange' or 'provider'")
            return
        if has_provider:
            provider = self._require_str(path, action, "provider")
            if provider is not None and provider not in self.providers:
                self.problem(f"{path}.provider", f"unknown provider {provider!r}")
            self._require_str(path, action, "handle")
            self._require_label(path, action, labels)
            return
        exchange = self._require_str(path, action, "exchange")
        if exchange is not None and exchange not in self.exchanges:
            self.problem(f"{path}.exchange", f"unknown exchange {exchange!r}")
        self._require_str(path, action, "account")
        if "name" in action:
            self._require_str(path, action, "name")
        else:
            self._require_label(path, action, labels)

    def _check_transfer(self, path: str, action: dict, labels: set[str]) -> None:
        origin = self._require_str(path, action, "origin")
        if origin is not None and origin not in self.exchanges:
            self.problem(f"{path}.origin", f"unknown exchange {origin!r}")
        beneficiary = self._require_str(path, action, "beneficiary_exchange")
        if beneficiary is not None and beneficiary not in self.exchanges:
            self.problem(f"{path}.beneficiary_exchange", f"unknown exchange {beneficiary!r}")
        for key in ("transfer_id", "originator_account", "beneficiary_account", "asset"):
            self._require_str(path, action, key)
        amount = action.get("amount")
        if not isinstance(amount, int) or amount <= 0:
            self.problem(f"{path}.amount", "must be a positive integer")

    def _check_post(self, path: str, action: dict, labels: set[str]) -> None:
        provider = self._require_str(path, action, "provider")
        if provider is not None and provider not in self.providers:
            self.problem(f"{path}.provider", f"unknown provider {provider!r}")
        self._require_str(path, action, "handle")
        self._check_body(path, action)

    def _check_body(self, path: str, action: dict) -> None:
        body = action.get("body")
        if not isinstance(body, (str, bytes)) or not body:
            self.problem(f"{path}.body", "must be non-empty text or bytes")

    def _check_inject_bot_post(self, path: str, action: dict, labels: set[str]) -> None:
        provider = self._require_str(path, action, "provider")
        if provider is not None and provider not in self.providers:
            self.problem(f"{path}.provider", f"unknown provider {provider!r}")
        self._require_str(path, action, "author")
        self._require_str(path, action, "origin")
        self._check_body(path, action)

    def _check_revoke(self, path: str, action: dict, labels: set[str]) -> None:
        coop = self._require_str(path, action, "coop")
        if coop is not None and coop not in self.coops:
            self.problem(f"{path}.coop", f"unknown cooperative {coop!r}")
        self._require_label(path, action, labels)

    def _check_recover(self, path: str, action: dict, labels: set[str]) -> None:
        provider = self._require_str(path, action, "provider")
        if provider is not None and provider not in self.providers:
            self.problem(f"{path}.provider", f"unknown provider {provider!r}")
        self._require_str(path, action, "handle")
        self._require_label(path, action, labels)

    def _check_tamper(self, path: str, action: dict, labels: set[str]) -> None:
        exchange = self._require_str(path, action, "exchange")
        if exchange is not None and exchange not in self.exchanges:
            self.problem(f"{path}.exchange", f"unknown exchange {exchange!r}")
        self._require_str(path, action, "account")

    def _check_port(self, path: str, action: dict, labels: set[str]) -> None:
        for key in ("provider", "origin"):
            name = self._require_str(path, action, key)
            if name is not None and name not in self.providers:
                self.problem(f"{path}.{key}", f"unknown provider {name!r}")
        if action.get("provider") == action.get("origin"):
            self.problem(f"{path}.origin", "porting from a provider onto itself")
        self._require_str(path, action, "handle")


def validate_config(config: ScenarioConfig) -> list[str]:
    """Empty list iff run_scenario's preconditions hold; each problem names
    the offending field path."""
    return _Validator(config).run()


# --- execution ---------------------------------------------------------------------

class _SenderKeys:
    """Deterministic signing/recovery key pairs the harness plays on behalf
    of senders."""

    def __init__(self, seed: bytes) -> None:
        self._seed = seed
        self._generation: dict[str, int] = {}
        self.recovery: dict[str, KeyPair] = {}

    def signing(self, handle: str) -> KeyPair:
        generation = self._generation.setdefault(handle, 0)
        material = b"%s/sender/%s/signing/%d" % (self._seed, handle.encode(), generation)
        return crypto.keygen(material)

    def rotate_signing(self, handle: str) -> KeyPair:
        self._generation[handle] = self._generation.get(handle, 0) + 1
        return self.signing(handle)

    def recovery_pair(self, handle: str) -> KeyPair:
        pair = self.recovery.get(handle)
        if pair is None:
            pair = crypto.keygen(b"%s/sender/%s/recovery" % (self._seed, handle.encode()))
            self.recovery[handle] = pair
        return pair


class _Adversary:
    """Pseudo-actor that injects unauthenticated traffic."""

    name = "adversary"

    def __init__(self) -> None:
        self._emit = lambda kind, payload: None


class Scenario:
    """A fully wired actor set executing one config."""

    def __init__(self, config: ScenarioConfig) -> None:
        problems = validate_config(config)
        if problems:
            raise ConfigInvalid(problems)
        self.config = config
        self.log = EventLog()
        self.now = 0
        self.keys = KeyDirectory()
        self.artifacts: dict[str, CounterSignedAttestation] = {}
        self.sender_keys = _SenderKeys(config.seed)
        self.adversary = _Adversary()
        self._bind(self.adversary)
        self._build_actors()

    # --- construction ---------------------------------------------------------

    def _bind(self, actor) -> None:
        name = actor.name
        actor._emit = lambda kind, payload: self.log.append(
            Event(tick=self.now, actor=name, kind=kind, payload=payload)
        )

    def _actor_key(self, role: str, name: str) -> KeyPair:
        return crypto.keygen(b"%s/%s/%s" % (self.config.seed, role.encode(), name.encode()))

    def _build_actors(self) -> None:
        config = self.config
        self.notaries: dict[str, Notary] = {}
        for entry in config.notaries:
            keypair = self._actor_key("notary", entry["name"])
            notary = Notary(
                entry["name"], keypair,
                JurisdictionPolicy(entry["jurisdiction"], frozenset(entry.get("compatible", []))),
            )
            self.keys.add(keypair.public_key)
            self._bind(notary)
            self.notaries[entry["name"]] = notary

        self.coops: dict[str, Cooperative] = {}
        self._coop_by_key_id: dict[crypto.Digest, Cooperative] = {}
        for entry in config.cooperatives:
            keypair = self._actor_key("coop", entry["name"])
            coop = Cooperative(
                entry["name"], keypair, entry["legal_rep"],
                queries=tuple(entry.get("queries", DEFAULT_QUERIES)),
                year_ticks=entry.get("year_ticks", 365),
                nonce_seed=self.config.seed + b"/nonce/" + entry["name"].encode(),
            )
            for member_raw in entry.get("members", []):
                coop.register_member(MemberRecord.from_map(member_raw))
            self.keys.add(keypair.public_key)
            self._bind(coop)
            self.coops[entry["name"]] = coop
            self._coop_by_key_id[keypair.key_id] = coop

        # A notary forwards revalidation queries to whichever of its
        # cooperatives issued the attestation.
        for notary in self.notaries.values():
            served = [c for c in self.coops.values() if c.legal_rep_id == notary.notary_id]
            notary.revocation_source = self._multi_coop_source(served)

        self.exchanges: dict[str, Exchange] = {}
        for entry in config.exchanges:
            exchange = Exchange(
                entry["name"], entry["jurisdiction"],
                disclosure_threshold=entry["threshold"],
                keys=self.keys, notaries=self.notaries,
            )
            self._bind(exchange)
            self.exchanges[entry["name"]] = exchange
        for exchange in self.exchanges.values():
            exchange.peers = {n: e for n, e in self.exchanges.items() if n != exchange.name}

        self.ledgers: dict[str, Ledger] = {}
        self.providers: dict[str, Provider] = {}
        for entry in config.providers:
            keypair = self._actor_key("provider", entry["name"])
            self.keys.add(keypair.public_key)
            provider = Provider(
                entry["name"], entry["jurisdiction"], keypair,
                keys=self.keys, notaries=self.notaries,
                ledger_registry=self.ledgers,
                followers={h: tuple(t) for h, t in entry.get("followers", {}).items()},
                prefer_local_port=entry.get("prefer_local_port", False),
            )
            self._bind(provider)
            self.providers[entry["name"]] = provider
        for provider in self.providers.values():
            provider.peers = {n: p for n, p in self.providers.items() if n != provider.name}

    @staticmethod
    def _multi_coop_source(coops: list[Cooperative]):
        def source(attestation_id, now):
            for coop in coops:
                status = coop.revalidation_status(attestation_id, now)
                if status is not Status.UNKNOWN:
                    return status
            return Status.UNKNOWN
        return source

    # --- run -------------------------------------------------------------------

    def run(self) -> EventLog:
        for i, action in enumerate(self.config.script):
            self.now = action["at"]
            self.log.append(Event(self.now, "scheduler", "action",
                                  {"index": i, **action}))
            try:
                self._dispatch(action)
            except ScriptActionFailed:
                raise
            except CoopAttestError as exc:
                raise ScriptActionFailed(self.now, action, exc) from exc
        self.now = self.config.tick_limit
        for name, provider in self.providers.items():
            ok = provider.ledger.verify_chain()
            self.log.append(Event(self.now, name, "chain-verified", {"ok": ok}))
        return self.log

    def _dispatch(self, action: dict) -> None:
        kind = action["action"]
        handler = getattr(self, "_do_" + kind.replace("-", "_"))
        handler(action)

    @staticmethod
    def _body_bytes(action: dict) -> bytes:
        body = action["body"]
        return body if isinstance(body, bytes) else body.encode("utf-8")

    def _do_issue(self, action: dict) -> None:
        coop = self.coops[action["coop"]]
        notary = self.notaries[coop.legal_rep_id]
        plain, blinded = coop.issue_blinded(
            action["member"], list(action["queries"]), action["mode"],
            self.now, action["ttl"],
        )
        snapshot = {d.hex(): tick for d, tick in coop.registry_snapshot().items()}
        send_message(coop, notary, "revocation-sync", {"entries": snapshot},
                     lambda: notary.sync_revocations(coop.registry_snapshot()))
        csa = send_message(
            coop, notary, "witness-request",
            {"plain": attestation_to_map(plain), "blinded": attestation_to_map(blinded)},
            lambda: notary.witness_and_countersign(plain, blinded, coop.public_key, self.now),
        )
        send_message(notary, coop, "countersigned",
                     {"attestation": attestation_to_map(csa)}, lambda: None)
        self.artifacts[action["label"]] = csa
        coop._emit("issued", {
            "label": action["label"],
            "attestation_id": blinded.attestation_id.value,
            "member": action["member"],
        })

    def _do_register(self, action: dict) -> None:
        if "provider" in action:
            provider = self.providers[action["provider"]]
            handle = action["handle"]
            signing = self.sender_keys.signing(handle)
            recovery = self.sender_keys.recovery_pair(handle)
            provider.onboard_sender(
                handle, self.artifacts[action["attestation"]],
                recovery.public_key, signing.key_id, self.now,
            )
            return
        exchange = self.exchanges[action["exchange"]]
        if "name" in action:
            exchange.register_beneficiary(action["account"], action["name"])
            exchange._emit("beneficiary-registered", {"account": action["account"]})
            return
        csa = self.artifacts[action["attestation"]]
        exchange.register_customer(action["account"], csa, self.now)
        exchange._emit("customer-registered", {
            "account": action["account"],
            "attestation_id": csa.blinded.attestation_id.value,
        })

    def _do_transfer(self, action: dict) -> None:
        origin = self.exchanges[action["origin"]]
        req = TransferRequest(
            transfer_id=action["transfer_id"],
            originator_account=action["originator_account"],
            beneficiary_account=action["beneficiary_account"],
            beneficiary_exchange=action["beneficiary_exchange"],
            asset=action["asset"],
            amount=action["amount"],
            requested_at=self.now,
        )
        origin.originate_transfer(req)
        beneficiary = self.exchanges[req.beneficiary_exchange]
        csa = beneficiary.request_attestation(origin, req.transfer_id)
        beneficiary.evaluate_transfer(req.transfer_id, csa, self.now)

    def _do_post(self, action: dict) -> None:
        provider = self.providers[action["provider"]]
        provider.publish_post(action["handle"], self._body_bytes(action), self.now)

    def _do_inject_bot_post(self, action: dict) -> None:
        target = self.providers[action["provider"]]
        post = Post(
            body=self._body_bytes(action),
            author_handle=action["author"],
            origin_provider=action["origin"],
            sent_at=self.now,
        )
        send_message(self.adversary, target, "post", post.to_map(),
                     lambda: target.receive_post(post, self.now))

    def _do_revoke(self, action: dict) -> None:
        coop = self.coops[action["coop"]]
        csa = self.artifacts[action["attestation"]]
        coop.revoke(csa.blinded.attestation_id, self.now)
        coop._emit("revoked", {"attestation_id": csa.blinded.attestation_id.value})

    def _do_recover(self, action: dict) -> None:
        provider = self.providers[action["provider"]]
        handle = action["handle"]
        new_csa = self.artifacts[action["attestation"]]
        account = provider.accounts.get(handle)
        if account is None:
            raise ScriptActionFailed(self.now, action, f"handle {handle!r} not onboarded")
        old_record = provider.ledger.get(account.attestation_ptr)
        old_csa = old_record.payload.csa
        issuing_coop = self._coop_by_key_id.get(old_csa.blinded.issuer_key_id)
        if issuing_coop is not None:
            issuing_coop.revoke(old_csa.blinded.attestation_id, self.now)
            issuing_coop._emit("revoked", {
                "attestation_id": old_csa.blinded.attestation_id.value,
            })
        new_signing = self.sender_keys.rotate_signing(handle)
        recovery = self.sender_keys.recovery_pair(handle)
        signature = crypto.sign(
            recovery, crypto.TAG_RECOVER, recovery_message(handle, new_signing.key_id)
        )
        provider.recover_account(handle, signature, new_signing.key_id, new_csa, self.now)

    def _do_tamper(self, action: dict) -> None:
        exchange = self.exchanges[action["exchange"]]
        csa = exchange.customer_attestation(action["account"])
        claims = list(csa.blinded.attributes)
        claims[0] = replace(claims[0], value=claims[0].value + "~")
        forged = replace(csa, blinded=replace(csa.blinded, attributes=tuple(claims)))
        exchange.inject_attestation(action["account"], forged)
        exchange._emit("tampered", {"account": action["account"]})

    def _do_port(self, action: dict) -> None:
        local = self.providers[action["provider"]]
        origin = self.providers[action["origin"]]
        account = origin.accounts.get(action["handle"])
        if account is None:
            raise ScriptActionFailed(self.now, action,
                                     f"handle {action['handle']!r} not onboarded at origin")
        local.port_attestation(action["origin"], account.attestation_ptr)


def run_scenario(config: ScenarioConfig) -> EventLog:
    """Execute the scripted scenario; a pure function of the config."""
    return Scenario(config).run()


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario fixture shipped with the package."""
    path = Path(__file__).resolve().parent / "scenarios" / f"{name}.scn"
    if not path.exists():
        raise FileNotFoundError(f"no bundled scenario named {name!r}")
    return path


def bundled_scenario_names() -> list[str]:
    directory = Path(__file__).resolve().parent / "scenarios"
    return sorted(p.stem for p in directory.glob("*.scn"))
