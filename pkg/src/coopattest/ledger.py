"""Simulated per-provider append-only ledgers.

Each provider owns one ledger and is its only registered writer; a
ledger is a provider-signed public bulletin board, not a consensus
system.  Records are hash-chained: every record carries the digest of
the previous record's canonical bytes (all zeros for the genesis
record), and every record is signed by the provider under the ledger
domain tag.  Anyone may read any ledger.

Two payload kinds exist: an attestation record embedding a countersigned
blinded attestation, and a post record holding a post-body digest plus a
pointer to the attestation record vouching for the author.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Union

from . import crypto
from .attestation import CounterSignedAttestation, attestation_from_map, attestation_to_map
from .canonical import canonical_parse, canonical_serialize
from .crypto import Digest, KeyPair, Signature, ZERO_DIGEST
from .errors import (
    DanglingAttestationPointer,
    DecodeError,
    OutOfBounds,
    UnregisteredWriter,
)

PAYLOAD_ATTESTATION = "attestation"
PAYLOAD_POST = "post"


@dataclass(frozen=True)
class RecordPointer:
    ledger_id: str
    index: int

    def to_map(self) -> dict:
        return {"ledger_id": self.ledger_id, "index": self.index}

    @classmethod
    def from_map(cls, raw: dict) -> "RecordPointer":
        return cls(ledger_id=raw["ledger_id"], index=raw["index"])


@dataclass(frozen=True)
class AttestationRecord:
    csa: CounterSignedAttestation

    def to_map(self) -> dict:
        return {"kind": PAYLOAD_ATTESTATION, "csa": attestation_to_map(self.csa)}


@dataclass(frozen=True)
class PostRecord:
    post_digest: Digest
    attestation_ptr: RecordPointer
    posted_at: int

    def to_map(self) -> dict:
        return {
            "kind": PAYLOAD_POST,
            "post_digest": self.post_digest.value,
            "attestation_ptr": self.attestation_ptr.to_map(),
            "posted_at": self.posted_at,
        }


Payload = Union[AttestationRecord, PostRecord]


def payload_from_map(raw: dict) -> Payload:
    kind = raw.get("kind")
    try:
        if kind == PAYLOAD_ATTESTATION:
            csa = attestation_from_map(raw["csa"])
            if not isinstance(csa, CounterSignedAttestation):
                raise DecodeError("attestation record must embed a countersigned artifact")
            return AttestationRecord(csa)
        if kind == PAYLOAD_POST:
            return PostRecord(
                post_digest=Digest(raw["post_digest"]),
                attestation_ptr=RecordPointer.from_map(raw["attestation_ptr"]),
                posted_at=raw["posted_at"],
            )
    except DecodeError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise DecodeError(f"malformed {kind} payload: {exc}") from exc
    raise DecodeError(f"unknown payload kind {kind!r}")


@dataclass(frozen=True)
class LedgerRecord:
    index: int
    prev_digest: Digest
    payload: Payload
    writer_key_id: Digest
    writer_signature: Signature

    def to_map(self) -> dict:
        return {
            "index": self.index,
            "prev_digest": self.prev_digest.value,
            "payload": self.payload.to_map(),
            "writer_key_id": self.writer_key_id.value,
            "writer_signature": self.writer_signature.to_map(),
        }

    @classmethod
    def from_map(cls, raw: dict) -> "LedgerRecord":
        try:
            return cls(
                index=raw["index"],
                prev_digest=Digest(raw["prev_digest"]),
                payload=payload_from_map(raw["payload"]),
                writer_key_id=Digest(raw["writer_key_id"]),
                writer_signature=Signature.from_map(raw["writer_signature"]),
            )
        except DecodeError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise DecodeError(f"malformed ledger record: {exc}") from exc


def record_signing_bytes(index: int, prev_digest: Digest, payload: Payload) -> bytes:
    return canonical_serialize({
        "index": index,
        "prev_digest": prev_digest.value,
        "payload": payload.to_map(),
    })


def record_bytes(record: LedgerRecord) -> bytes:
    return canonical_serialize(record.to_map())


class Ledger:
    """Single-writer, publicly readable hash chain with a post-digest index."""

    def __init__(
        self,
        ledger_id: str,
        writer_public_key: bytes,
        *,
        resolver: Callable[[str], "Ledger | None"] | None = None,
    ) -> None:
        self.ledger_id = ledger_id
        self.writer_public_key = writer_public_key
        self._resolver = resolver
        self._records: list[LedgerRecord] = []
        self._post_index: dict[Digest, list[int]] = {}

    def __len__(self) -> int:
        return len(self._records)

    @property
    def records(self) -> tuple[LedgerRecord, ...]:
        return tuple(self._records)

    def _resolve(self, ledger_id: str) -> "Ledger | None":
        if ledger_id == self.ledger_id:
            return self
        if self._resolver is None:
            return None
        return self._resolver(ledger_id)

    def append(self, writer: KeyPair, payload: Payload) -> RecordPointer:
        if writer.public_key != self.writer_public_key:
            raise UnregisteredWriter(f"key {writer.key_id.hex()[:12]} may not write {self.ledger_id}")
        if isinstance(payload, PostRecord):
            target = self._resolve(payload.attestation_ptr.ledger_id)
            if target is None:
                raise DanglingAttestationPointer(
                    f"unknown ledger {payload.attestation_ptr.ledger_id!r}"
                )
            try:
                referenced = target.get(payload.attestation_ptr)
            except OutOfBounds as exc:
                raise DanglingAttestationPointer(str(exc)) from exc
            if not isinstance(referenced.payload, AttestationRecord):
                raise DanglingAttestationPointer(
                    f"{payload.attestation_ptr} is not an attestation record"
                )
        index = len(self._records)
        prev = ZERO_DIGEST if index == 0 else crypto.digest(record_bytes(self._records[-1]))
        signature = crypto.sign(writer, crypto.TAG_LEDGER, record_signing_bytes(index, prev, payload))
        record = LedgerRecord(
            index=index,
            prev_digest=prev,
            payload=payload,
            writer_key_id=writer.key_id,
            writer_signature=signature,
        )
        self._records.append(record)
        if isinstance(payload, PostRecord):
            self._post_index.setdefault(payload.post_digest, []).append(index)
        return RecordPointer(self.ledger_id, index)

    def get(self, ptr: RecordPointer) -> LedgerRecord:
        if ptr.ledger_id != self.ledger_id:
            raise OutOfBounds(f"pointer targets {ptr.ledger_id!r}, not {self.ledger_id!r}")
        if not 0 <= ptr.index < len(self._records):
            raise OutOfBounds(f"index {ptr.index} outside ledger of length {len(self._records)}")
        return self._records[ptr.index]

    def find_by_post_digest(self, d: Digest) -> list[RecordPointer]:
        """All post records whose digest equals *d*, in ascending index order."""
        return [RecordPointer(self.ledger_id, i) for i in self._post_index.get(d, [])]

    def post_matches(self, d: Digest) -> list[LedgerRecord]:
        """The matching post records themselves; one indexed search, including
        its hit entries, like any transparency-log query."""
        return [self._records[i] for i in self._post_index.get(d, [])]

    def verify_chain(self) -> bool:
        """True iff every record chains to its predecessor and carries a valid
        signature from the registered writer."""
        expected_key_id = crypto.digest(self.writer_public_key)
        prev = ZERO_DIGEST
        for i, record in enumerate(self._records):
            if record.index != i:
                return False
            if record.prev_digest != prev:
                return False
            if record.writer_key_id != expected_key_id:
                return False
            message = record_signing_bytes(record.index, record.prev_digest, record.payload)
            if not crypto.verify(self.writer_public_key, crypto.TAG_LEDGER, message,
                                 record.writer_signature):
                return False
            prev = crypto.digest(record_bytes(record))
        return True

    # --- persistence ---------------------------------------------------------

    def dump(self, path: str | Path) -> None:
        with open(path, "wb") as fh:
            for record in self._records:
                fh.write(record_bytes(record))
                fh.write(b"\n")

    @classmethod
    def load(
        cls,
        ledger_id: str,
        writer_public_key: bytes,
        path: str | Path,
        *,
        resolver: Callable[[str], "Ledger | None"] | None = None,
    ) -> "Ledger":
        records = []
        with open(path, "rb") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(LedgerRecord.from_map(canonical_parse(line)))
        return cls.from_records(ledger_id, writer_public_key, records, resolver=resolver)

    @classmethod
    def from_records(
        cls,
        ledger_id: str,
        writer_public_key: bytes,
        records: Iterable[LedgerRecord],
        *,
        resolver: Callable[[str], "Ledger | None"] | None = None,
    ) -> "Ledger":
        """Rebuild from stored records without validating them; verify_chain
        is the integrity check."""
        ledger = cls(ledger_id, writer_public_key, resolver=resolver)
        for record in records:
            ledger._records.append(record)
            if isinstance(record.payload, PostRecord):
                ledger._post_index.setdefault(record.payload.post_digest, []).append(record.index)
        return ledger
