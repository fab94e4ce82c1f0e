"""Exchange actors implementing the funds travel-rule flow.

An originator registers a countersigned blinded attestation with its
exchange.  When a transfer reaches the beneficiary exchange, that
exchange requests the attestation out-of-band from the origin exchange
(a direct, ordered, private channel, never the ledger), verifies it,
revalidates it with the notary named inside, and only when the amount
crosses the policy threshold demands identity disclosure and assembles
the five-field customer-information record:

    originator name / originator account / originator address-or-id /
    beneficiary name / beneficiary account.

Below the threshold, the transfer is accepted with no disclosure request
ever leaving the exchange; the originator stays anonymous.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .attestation import CounterSignedAttestation, attestation_to_map, verify_countersigned
from .cooperative import Status
from .crypto import KeyDirectory
from .errors import (
    DuplicateAccount,
    DuplicateTransfer,
    InvalidAttestation,
    MissingResidenceAttribute,
    NoAttestationOnFile,
    NotDisclosed,
    UnknownAccount,
    UnknownTransfer,
)
from .events import no_emit, send_message
from .notary import (
    OUTCOME_DENIED,
    OUTCOME_DISCLOSED,
    PURPOSE_TRAVEL_RULE,
    DisclosureResponse,
    Notary,
)

ACCEPTED = "accepted"
HELD = "held-pending-disclosure"
REJECTED = "rejected"

RESIDENCE_ATTRIBUTE = "residence-country"


@dataclass(frozen=True)
class TransferRequest:
    transfer_id: str
    originator_account: str
    beneficiary_account: str
    beneficiary_exchange: str
    asset: str
    amount: int  # minor units
    requested_at: int

    def __post_init__(self) -> None:
        if self.amount <= 0:
            raise ValueError("amount must be positive")
        if not self.originator_account or not self.beneficiary_account:
            raise ValueError("accounts must be non-empty")

    def to_map(self) -> dict:
        return {
            "transfer_id": self.transfer_id,
            "originator_account": self.originator_account,
            "beneficiary_account": self.beneficiary_account,
            "beneficiary_exchange": self.beneficiary_exchange,
            "asset": self.asset,
            "amount": self.amount,
            "requested_at": self.requested_at,
        }

    @classmethod
    def from_map(cls, raw: dict) -> "TransferRequest":
        return cls(
            transfer_id=raw["transfer_id"],
            originator_account=raw["originator_account"],
            beneficiary_account=raw["beneficiary_account"],
            beneficiary_exchange=raw["beneficiary_exchange"],
            asset=raw["asset"],
            amount=raw["amount"],
            requested_at=raw["requested_at"],
        )


@dataclass(frozen=True)
class TravelRuleRecord:
    """The five customer-information fields shared between institutions."""

    originator_name: str
    originator_account: str
    originator_address_or_id: str
    beneficiary_name: str
    beneficiary_account: str

    def __post_init__(self) -> None:
        for name, value in self.to_map().items():
            if not value:
                raise ValueError(f"travel-rule field {name} must be non-empty")

    def to_map(self) -> dict:
        return {
            "originator_name": self.originator_name,
            "originator_account": self.originator_account,
            "originator_address_or_id": self.originator_address_or_id,
            "beneficiary_name": self.beneficiary_name,
            "beneficiary_account": self.beneficiary_account,
        }


@dataclass(frozen=True)
class TransferDecision:
    outcome: str
    reason: str
    travel_record: TravelRuleRecord | None = None

    def __post_init__(self) -> None:
        if self.travel_record is not None and self.outcome != ACCEPTED:
            raise ValueError("travel record only accompanies an accepted transfer")

    def to_map(self) -> dict:
        raw = {"outcome": self.outcome, "reason": self.reason}
        if self.travel_record is not None:
            raw["travel_record"] = self.travel_record.to_map()
        return raw


def assemble_travel_record(
    disclosure: DisclosureResponse,
    req: TransferRequest,
    beneficiary_name: str,
) -> TravelRuleRecord:
    """Assemble the five-field record from a granted disclosure.

    The originator's name comes from the disclosed legal identity, the
    address-or-id slot from the attested residence attribute, the account
    numbers from the transfer request, and the beneficiary name from the
    beneficiary exchange's own customer registry.
    """
    if disclosure.outcome != OUTCOME_DISCLOSED or disclosure.subject is None:
        raise NotDisclosed(disclosure.outcome)
    residence = None
    for claim in disclosure.attributes or ():
        if claim.name == RESIDENCE_ATTRIBUTE:
            residence = claim.value
            break
    if residence is None:
        raise MissingResidenceAttribute(
            f"disclosed attestation carries no {RESIDENCE_ATTRIBUTE} attribute"
        )
    return TravelRuleRecord(
        originator_name=disclosure.subject,
        originator_account=req.originator_account,
        originator_address_or_id=residence,
        beneficiary_name=beneficiary_name,
        beneficiary_account=req.beneficiary_account,
    )


class Exchange:
    """A VASP actor; single-threaded, messages serialized by the harness."""

    def __init__(
        self,
        name: str,
        jurisdiction: str,
        *,
        disclosure_threshold: int,
        keys: KeyDirectory,
        notaries: Mapping[str, Notary],
    ) -> None:
        self.name = name
        self.jurisdiction = jurisdiction
        self.disclosure_threshold = disclosure_threshold
        self.keys = keys
        self.notaries = notaries
        self.peers: dict[str, Exchange] = {}
        self._customers: dict[str, CounterSignedAttestation] = {}
        self._kyc_names: dict[str, str] = {}
        self._outgoing: dict[str, TransferRequest] = {}
        self._incoming: dict[str, TransferRequest] = {}
        self._on_file: dict[str, CounterSignedAttestation] = {}
        self.decisions: dict[str, TransferDecision] = {}
        self._emit = no_emit

    # --- registration -----------------------------------------------------------

    def _resolve_keys(self, csa: CounterSignedAttestation) -> tuple[bytes, bytes] | None:
        issuer_key = self.keys.get(csa.blinded.issuer_key_id)
        notary_key = self.keys.get(csa.notary_key_id)
        if issuer_key is None or notary_key is None:
            return None
        return issuer_key, notary_key

    def register_customer(self, account: str, csa: CounterSignedAttestation, now: int) -> None:
        """Bind an account to its countersigned attestation."""
        if account in self._customers:
            raise DuplicateAccount(account)
        resolved = self._resolve_keys(csa)
        if resolved is None:
            raise InvalidAttestation("issuer or notary key unknown to this exchange")
        report = verify_countersigned(csa, resolved[0], resolved[1], now)
        if not report.passed:
            raise InvalidAttestation(f"failing checks: {report.failing()}")
        self._customers[account] = csa

    def customer_attestation(self, account: str) -> CounterSignedAttestation:
        try:
            return self._customers[account]
        except KeyError:
            raise UnknownAccount(account) from None

    def register_beneficiary(self, account: str, legal_name: str) -> None:
        """Conventional KYC entry; source of the beneficiary-name field."""
        if account in self._kyc_names:
            raise DuplicateAccount(account)
        if not legal_name:
            raise ValueError("beneficiary legal name must be non-empty")
        self._kyc_names[account] = legal_name

    def inject_attestation(self, account: str, csa: CounterSignedAttestation) -> None:
        """Fault-injection hook: overwrite a stored attestation without any
        verification, modeling corrupted storage.  Scenario use only."""
        if account not in self._customers:
            raise UnknownAccount(account)
        self._customers[account] = csa

    # --- transfer flow ------------------------------------------------------------

    def _peer(self, name: str) -> "Exchange":
        try:
            return self.peers[name]
        except KeyError:
            raise ValueError(f"exchange {name!r} not reachable from {self.name!r}") from None

    def originate_transfer(self, req: TransferRequest) -> None:
        if req.originator_account not in self._customers:
            raise UnknownAccount(req.originator_account)
        if req.transfer_id in self._outgoing:
            raise DuplicateTransfer(req.transfer_id)
        peer = self._peer(req.beneficiary_exchange)
        self._outgoing[req.transfer_id] = req
        send_message(self, peer, "transfer", req.to_map(),
                     lambda: peer.receive_transfer(req))

    def receive_transfer(self, req: TransferRequest) -> None:
        self._incoming[req.transfer_id] = req

    def provide_attestation(self, transfer_id: str) -> CounterSignedAttestation:
        """Origin side of the out-of-band attestation exchange."""
        req = self._outgoing.get(transfer_id)
        if req is None:
            raise UnknownTransfer(transfer_id)
        return self._customers[req.originator_account]

    def request_attestation(self, origin: "Exchange", transfer_id: str) -> CounterSignedAttestation:
        """Beneficiary side: fetch the originator's attestation over the
        direct channel and keep it on file for evaluation."""
        csa = send_message(
            self, origin, "attestation-request", {"transfer_id": transfer_id},
            lambda: origin.provide_attestation(transfer_id),
        )
        send_message(
            origin, self, "attestation-delivery",
            {"transfer_id": transfer_id, "attestation": attestation_to_map(csa)},
            lambda: None,
        )
        self._on_file[transfer_id] = csa
        return csa

    # --- evaluation ----------------------------------------------------------------

    def evaluate_transfer(self, transfer_id: str, csa: CounterSignedAttestation,
                          now: int) -> TransferDecision:
        """Verify, revalidate, then apply the disclosure policy.

        A transfer whose attestation fails any verification or revalidation
        step never reaches the accepted state.
        """
        req = self._incoming.get(transfer_id)
        if req is None or transfer_id not in self._on_file:
            raise NoAttestationOnFile(transfer_id)
        decision = self._decide(req, csa, now)
        self.decisions[transfer_id] = decision
        self._emit("transfer-decision", {"transfer_id": transfer_id, **decision.to_map()})
        return decision

    def _decide(self, req: TransferRequest, csa: CounterSignedAttestation,
                now: int) -> TransferDecision:
        resolved = self._resolve_keys(csa)
        if resolved is None:
            return TransferDecision(REJECTED, "verification-failed")
        report = verify_countersigned(csa, resolved[0], resolved[1], now)
        if not report.passed:
            reason = "expired" if report.expired_only else "verification-failed"
            return TransferDecision(REJECTED, reason)

        notary = self.notaries.get(csa.notary_id)
        if notary is None:
            return TransferDecision(REJECTED, "unknown-notary")
        attestation_id = csa.blinded.attestation_id
        status = send_message(
            self, notary, "revalidation", {"attestation_id": attestation_id.value},
            lambda: notary.respond_revalidation(attestation_id, now),
        )
        send_message(notary, self, "revalidation-status",
                     {"attestation_id": attestation_id.value, "status": status.value},
                     lambda: None)
        if status is not Status.VALID:
            return TransferDecision(REJECTED, status.value)

        if req.amount < self.disclosure_threshold:
            return TransferDecision(ACCEPTED, "below-threshold")

        disclosure = send_message(
            self, notary, "disclosure-request",
            {"attestation_id": attestation_id.value,
             "jurisdiction": self.jurisdiction, "purpose": PURPOSE_TRAVEL_RULE},
            lambda: notary.respond_disclosure(
                attestation_id, self.jurisdiction, PURPOSE_TRAVEL_RULE, now
            ),
        )
        send_message(notary, self, "disclosure-response",
                     {"attestation_id": attestation_id.value, "outcome": disclosure.outcome},
                     lambda: None)
        if disclosure.outcome == OUTCOME_DENIED:
            return TransferDecision(HELD, "denied-jurisdiction")
        if disclosure.outcome != OUTCOME_DISCLOSED:
            return TransferDecision(REJECTED, disclosure.outcome)

        beneficiary_name = self._kyc_names.get(req.beneficiary_account)
        if beneficiary_name is None:
            raise UnknownAccount(f"beneficiary {req.beneficiary_account!r} not on the KYC registry")
        record = assemble_travel_record(disclosure, req, beneficiary_name)
        return TransferDecision(ACCEPTED, "disclosed", travel_record=record)
