"""Decentralized social-network providers.

A sender onboards at a home provider with a handle-bound countersigned
attestation, which the provider records on its own ledger.  Every post
gets its body digest recorded next to a pointer at that attestation
record, then travels to whichever providers host followers.  A remote
provider never trusts the wire: it recomputes the body digest, searches
the origin provider's ledger for it, resolves the attestation behind the
match, and delivers only when the handle binds, the countersignature
verifies, and the notary still vouches for the attestation.  Anything
else drops, which is what keeps bot traffic out without the remote
provider ever having authenticated the sender itself.

Providers may port attestation records onto their own ledgers and, by
policy, resolve matches locally instead of re-reading the origin chain.
A recovery key rotates a lost account: the old account is deactivated,
a fresh attestation record lands on the ledger (append-only, the old
record stays), and all providers are notified.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

from . import crypto
from .attestation import (
    MODE_HANDLE,
    CounterSignedAttestation,
    verify_countersigned,
)
from .canonical import canonical_serialize
from .cooperative import Status
from .crypto import Digest, KeyDirectory, KeyPair, Signature
from .errors import (
    BadRecoverySignature,
    DanglingAttestationPointer,
    HandleMismatch,
    HandleTaken,
    InactiveAccount,
    InvalidAttestation,
    OutOfBounds,
    UnknownSender,
    Untraceable,
)
from .events import no_emit, send_message
from .ledger import AttestationRecord, Ledger, LedgerRecord, PostRecord, RecordPointer
from .notary import PURPOSE_DSN_DISPUTE, DisclosureResponse, Notary

OUTCOME_DELIVER = "deliver"
OUTCOME_DROP = "drop"

REASON_ATTESTED = "attested"
REASON_NO_MATCH = "no-ledger-match"
REASON_INVALID = "attestation-invalid"
REASON_EXPIRED = "attestation-expired"
REASON_REVOKED = "attestation-revoked"
REASON_ORIGIN = "origin-mismatch"


@dataclass(frozen=True)
class SenderAccount:
    handle: str
    home_provider: str
    signing_key_id: Digest
    recovery_public_key: bytes
    attestation_ptr: RecordPointer
    active: bool


@dataclass(frozen=True)
class Post:
    body: bytes
    author_handle: str
    origin_provider: str
    sent_at: int

    def __post_init__(self) -> None:
        if not self.body:
            raise ValueError("post body must be non-empty")

    def to_map(self) -> dict:
        return {
            "body": self.body,
            "author_handle": self.author_handle,
            "origin_provider": self.origin_provider,
            "sent_at": self.sent_at,
        }

    @classmethod
    def from_map(cls, raw: dict) -> "Post":
        return cls(
            body=raw["body"],
            author_handle=raw["author_handle"],
            origin_provider=raw["origin_provider"],
            sent_at=raw["sent_at"],
        )


@dataclass(frozen=True)
class FilterDecision:
    outcome: str
    reason: str

    def __post_init__(self) -> None:
        if (self.outcome == OUTCOME_DELIVER) != (self.reason == REASON_ATTESTED):
            raise ValueError("deliver exactly when attested")


def recovery_message(handle: str, new_signing_key_id: Digest) -> bytes:
    """Canonical bytes a sender's recovery key signs to rotate an account."""
    return canonical_serialize(["recover", handle, new_signing_key_id.value])


class Provider:
    """One social-media provider plus its ledger; single-threaded actor."""

    def __init__(
        self,
        name: str,
        jurisdiction: str,
        writer: KeyPair,
        *,
        keys: KeyDirectory,
        notaries: Mapping[str, Notary],
        ledger_registry: dict[str, Ledger],
        followers: Mapping[str, tuple[str, ...]] | None = None,
        prefer_local_port: bool = False,
    ) -> None:
        self.name = name
        self.jurisdiction = jurisdiction
        self.writer = writer
        self.keys = keys
        self.notaries = notaries
        self.prefer_local_port = prefer_local_port
        self.followers: dict[str, tuple[str, ...]] = {
            handle: tuple(targets) for handle, targets in (followers or {}).items()
        }
        self._ledgers = ledger_registry
        self.ledger = Ledger(name, writer.public_key, resolver=ledger_registry.get)
        ledger_registry[name] = self.ledger
        self.peers: dict[str, Provider] = {}
        self.accounts: dict[str, SenderAccount] = {}
        self.retired: list[SenderAccount] = []
        self.filter_log: list[tuple[Post, FilterDecision]] = []
        self.delivered: list[Post] = []
        self.recovery_notices: list[dict] = []
        self._ported: dict[tuple[str, int], RecordPointer] = {}
        self._emit = no_emit

    # --- onboarding -----------------------------------------------------------

    def _verify_csa(self, csa: CounterSignedAttestation, now: int):
        issuer_key = self.keys.get(csa.blinded.issuer_key_id)
        notary_key = self.keys.get(csa.notary_key_id)
        if issuer_key is None or notary_key is None:
            return None
        return verify_countersigned(csa, issuer_key, notary_key, now)

    def _check_handle_binding(self, csa: CounterSignedAttestation, handle: str) -> None:
        subject = csa.blinded.subject
        if subject.mode != MODE_HANDLE or subject.value != handle:
            raise HandleMismatch(
                f"attestation subject is {subject.mode}:{subject.value!r}, expected {handle!r}"
            )

    def onboard_sender(
        self,
        handle: str,
        csa: CounterSignedAttestation,
        recovery_public_key: bytes,
        signing_key_id: Digest,
        now: int,
    ) -> SenderAccount:
        """Record the sender's attestation on the ledger and activate the
        account.  Must happen before the handle transmits any post."""
        if handle in self.accounts:
            raise HandleTaken(handle)
        self._check_handle_binding(csa, handle)
        report = self._verify_csa(csa, now)
        if report is None or not report.passed:
            raise InvalidAttestation(
                "unknown keys" if report is None else f"failing checks: {report.failing()}"
            )
        ptr = self.ledger.append(self.writer, AttestationRecord(csa))
        account = SenderAccount(
            handle=handle,
            home_provider=self.name,
            signing_key_id=signing_key_id,
            recovery_public_key=recovery_public_key,
            attestation_ptr=ptr,
            active=True,
        )
        self.accounts[handle] = account
        self._emit("onboard", {"handle": handle, "ledger_index": ptr.index})
        return account

    def deactivate_sender(self, handle: str) -> None:
        account = self.accounts.get(handle)
        if account is None:
            raise UnknownSender(handle)
        self.accounts[handle] = replace(account, active=False)

    # --- publishing ------------------------------------------------------------

    def publish_post(self, handle: str, body: bytes, now: int) -> RecordPointer:
        """Hash the post onto the ledger, then forward it to every provider
        hosting at least one follower of the handle."""
        account = self.accounts.get(handle)
        if account is None:
            raise UnknownSender(handle)
        if not account.active:
            raise InactiveAccount(handle)
        post = Post(body=body, author_handle=handle, origin_provider=self.name, sent_at=now)
        ptr = self.ledger.append(
            self.writer, PostRecord(crypto.digest(body), account.attestation_ptr, now)
        )
        self._emit("post-recorded", {
            "handle": handle, "post_digest": crypto.digest(body).value, "ledger_index": ptr.index,
        })
        for target in self.followers.get(handle, ()):
            peer = self.peers[target]
            send_message(self, peer, "post", post.to_map(),
                         lambda p=peer: p.receive_post(post, now))
        return ptr

    def receive_post(self, post: Post, now: int) -> FilterDecision:
        decision = self.filter_incoming(post, now)
        self.filter_log.append((post, decision))
        if decision.outcome == OUTCOME_DELIVER:
            self.delivered.append(post)
        self._emit("filter-decision", {
            "author_handle": post.author_handle,
            "origin_provider": post.origin_provider,
            "post_digest": crypto.digest(post.body).value,
            "outcome": decision.outcome,
            "reason": decision.reason,
        })
        return decision

    # --- filtering -------------------------------------------------------------

    def _search_posts(self, ledger: Ledger, body_digest: Digest) -> list[LedgerRecord]:
        self._emit("ledger-search", {"ledger": ledger.ledger_id, "post_digest": body_digest.value})
        return ledger.post_matches(body_digest)

    def _read_record(self, ledger: Ledger, ptr: RecordPointer) -> LedgerRecord | None:
        try:
            record = ledger.get(ptr)
        except OutOfBounds:
            return None
        if ledger is not self.ledger:
            self._emit("ledger-read", {"ledger": ptr.ledger_id, "index": ptr.index})
        return record

    def _fetch_attestation(self, att_ptr: RecordPointer) -> CounterSignedAttestation | None:
        """Resolve an attestation pointer, preferring a local ported copy
        when policy says so."""
        if self.prefer_local_port:
            local_ptr = self._ported.get((att_ptr.ledger_id, att_ptr.index))
            if local_ptr is not None:
                record = self._read_record(self.ledger, local_ptr)
                if record is not None and isinstance(record.payload, AttestationRecord):
                    return record.payload.csa
        target = self._ledgers.get(att_ptr.ledger_id)
        if target is None:
            return None
        record = self._read_record(target, att_ptr)
        if record is None or not isinstance(record.payload, AttestationRecord):
            return None
        return record.payload.csa

    def filter_incoming(self, post: Post, now: int) -> FilterDecision:
        """Re-derive the post's standing from the origin ledger.

        Deliver iff some matching post record resolves to a valid,
        handle-matching, unrevoked attestation.  With several matches the
        drop reason comes from whichever candidate got furthest through
        the pipeline.
        """
        body_digest = crypto.digest(post.body)
        origin_ledger = self._ledgers.get(post.origin_provider)
        if origin_ledger is None:
            return FilterDecision(OUTCOME_DROP, REASON_NO_MATCH)
        matches = self._search_posts(origin_ledger, body_digest)
        if not matches:
            return FilterDecision(OUTCOME_DROP, REASON_NO_MATCH)
        best_stage, best_reason = 0, REASON_NO_MATCH
        for record in matches:
            stage, reason = self._judge_match(record, post, now)
            if reason == REASON_ATTESTED:
                return FilterDecision(OUTCOME_DELIVER, REASON_ATTESTED)
            if stage > best_stage:
                best_stage, best_reason = stage, reason
        return FilterDecision(OUTCOME_DROP, best_reason)

    def _judge_match(self, record: LedgerRecord, post: Post, now: int) -> tuple[int, str]:
        csa = self._fetch_attestation(record.payload.attestation_ptr)
        if csa is None:
            return 1, REASON_INVALID
        subject = csa.blinded.subject
        if subject.mode != MODE_HANDLE or subject.value != post.author_handle:
            return 2, REASON_ORIGIN
        report = self._verify_csa(csa, now)
        if report is None:
            return 3, REASON_INVALID
        if not report.passed:
            return 3, REASON_EXPIRED if report.expired_only else REASON_INVALID
        notary = self.notaries.get(csa.notary_id)
        if notary is None:
            return 4, REASON_INVALID
        attestation_id = csa.blinded.attestation_id
        status = send_message(
            self, notary, "revalidation", {"attestation_id": attestation_id.value},
            lambda: notary.respond_revalidation(attestation_id, now),
        )
        send_message(notary, self, "revalidation-status",
                     {"attestation_id": attestation_id.value, "status": status.value},
                     lambda: None)
        if status is Status.VALID:
            return 6, REASON_ATTESTED
        if status is Status.REVOKED:
            return 5, REASON_REVOKED
        if status is Status.EXPIRED:
            return 5, REASON_EXPIRED
        return 5, REASON_INVALID

    # --- porting ---------------------------------------------------------------

    def port_attestation(self, origin_ledger: str, ptr: RecordPointer) -> RecordPointer:
        """Copy an attestation record from a remote ledger onto this one."""
        source = self._ledgers.get(origin_ledger)
        if source is None:
            raise DanglingAttestationPointer(f"unknown ledger {origin_ledger!r}")
        record = self._read_record(source, ptr)
        if record is None or not isinstance(record.payload, AttestationRecord):
            raise DanglingAttestationPointer(f"{ptr} is not an attestation record")
        local_ptr = self.ledger.append(self.writer, record.payload)
        self._ported[(ptr.ledger_id, ptr.index)] = local_ptr
        self._emit("ported", {
            "origin_ledger": ptr.ledger_id, "origin_index": ptr.index,
            "local_index": local_ptr.index,
        })
        return local_ptr

    # --- disclosure ---------------------------------------------------------------

    def _trace_attestation(self, post: Post) -> CounterSignedAttestation | None:
        origin_ledger = self._ledgers.get(post.origin_provider)
        if origin_ledger is None:
            return None
        for record in self._search_posts(origin_ledger, crypto.digest(post.body)):
            csa = self._fetch_attestation(record.payload.attestation_ptr)
            if csa is None:
                continue
            subject = csa.blinded.subject
            if subject.mode == MODE_HANDLE and subject.value == post.author_handle:
                return csa
        return None

    def request_sender_disclosure(self, post: Post, now: int) -> DisclosureResponse:
        """Trace the post to its attestation and ask the legal contact named
        in the envelope to disclose the sender's identity."""
        csa = self._trace_attestation(post)
        if csa is None:
            raise Untraceable("post matches no resolvable attested record")
        notary = self.notaries.get(csa.notary_id)
        if notary is None:
            raise Untraceable(f"legal contact {csa.notary_id!r} is not reachable")
        attestation_id = csa.blinded.attestation_id
        response = send_message(
            self, notary, "disclosure-request",
            {"attestation_id": attestation_id.value,
             "jurisdiction": self.jurisdiction, "purpose": PURPOSE_DSN_DISPUTE},
            lambda: notary.respond_disclosure(
                attestation_id, self.jurisdiction, PURPOSE_DSN_DISPUTE, now
            ),
        )
        send_message(notary, self, "disclosure-response",
                     {"attestation_id": attestation_id.value, "outcome": response.outcome},
                     lambda: None)
        return response

    # --- recovery ---------------------------------------------------------------

    def recover_account(
        self,
        handle: str,
        recovery_signature: Signature,
        new_signing_key_id: Digest,
        new_csa: CounterSignedAttestation,
        now: int,
    ) -> SenderAccount:
        """Rotate a lost account under the recovery key: deactivate the old
        account, record a fresh attestation, and notify every provider."""
        account = self.accounts.get(handle)
        if account is None:
            raise UnknownSender(handle)
        message = recovery_message(handle, new_signing_key_id)
        if not crypto.verify(account.recovery_public_key, crypto.TAG_RECOVER,
                             message, recovery_signature):
            raise BadRecoverySignature(handle)
        try:
            self._check_handle_binding(new_csa, handle)
        except HandleMismatch as exc:
            raise InvalidAttestation(str(exc)) from exc
        report = self._verify_csa(new_csa, now)
        if report is None or not report.passed:
            raise InvalidAttestation(
                "unknown keys" if report is None else f"failing checks: {report.failing()}"
            )
        self.retired.append(replace(account, active=False))
        ptr = self.ledger.append(self.writer, AttestationRecord(new_csa))
        fresh = SenderAccount(
            handle=handle,
            home_provider=self.name,
            signing_key_id=new_signing_key_id,
            recovery_public_key=account.recovery_public_key,
            attestation_ptr=ptr,
            active=True,
        )
        self.accounts[handle] = fresh
        self._emit("recover", {"handle": handle, "ledger_index": ptr.index})
        for peer in self.peers.values():
            send_message(self, peer, "recovery-notice", {"handle": handle},
                         lambda p=peer: p.note_recovery(handle, now))
        return fresh

    def note_recovery(self, handle: str, now: int) -> None:
        self.recovery_notices.append({"handle": handle, "at": now})
