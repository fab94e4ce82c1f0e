"""Digests, deterministic key generation, and domain-tagged signatures.

One hash function (SHA-256) backs the whole artifact; every serialized
record names it in a ``hash_alg`` field so formats stay self-describing.
Signatures go through a pluggable scheme: the production scheme is
Ed25519 (deterministic by construction, so scenarios replay bit-exactly)
and a trivially forgeable null scheme exists purely for negative tests.

Every signature is bound to a domain tag.  The same key may sign plain
attestations, blinded attestations, countersignatures, and ledger
records, and a signature for one kind must never verify as another.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .errors import EmptySeed, UnknownDomainTag

HASH_ALG = "sha-256"
DIGEST_SIZE = 32

TAG_PLAIN = "coop-attest/plain/v1"
TAG_BLINDED = "coop-attest/blinded/v1"
TAG_COUNTER = "coop-attest/counter/v1"
TAG_LEDGER = "coop-attest/ledger/v1"
TAG_RECOVER = "coop-attest/recover/v1"

DOMAIN_TAGS = frozenset({TAG_PLAIN, TAG_BLINDED, TAG_COUNTER, TAG_LEDGER, TAG_RECOVER})

_KEYGEN_CONTEXT = b"coop-attest/keygen/v1:"


@dataclass(frozen=True)
class Digest:
    """A 32-byte hash value; equality is byte-wise."""

    value: bytes

    def __post_init__(self) -> None:
        if not isinstance(self.value, bytes) or len(self.value) != DIGEST_SIZE:
            raise ValueError("digest must be exactly 32 bytes")

    def hex(self) -> str:
        return self.value.hex()

    @classmethod
    def from_hex(cls, text: str) -> "Digest":
        return cls(bytes.fromhex(text))


ZERO_DIGEST = Digest(b"\x00" * DIGEST_SIZE)


@dataclass(frozen=True)
class KeyPair:
    public_key: bytes
    secret_key: bytes
    key_id: Digest


@dataclass(frozen=True)
class Signature:
    data: bytes
    signer_key_id: Digest
    domain_tag: str

    def to_map(self) -> dict:
        return {
            "bytes": self.data,
            "signer_key_id": self.signer_key_id.value,
            "domain_tag": self.domain_tag,
        }

    @classmethod
    def from_map(cls, raw: dict) -> "Signature":
        return cls(
            data=raw["bytes"],
            signer_key_id=Digest(raw["signer_key_id"]),
            domain_tag=raw["domain_tag"],
        )


def digest(data: bytes) -> Digest:
    """SHA-256 of *data*; 32 bytes, stable across platforms."""
    return Digest(hashlib.sha256(data).digest())


def _framed(domain_tag: str, message: bytes) -> bytes:
    # Tags contain no newline, so prefix + separator is unambiguous.
    return domain_tag.encode("utf-8") + b"\n" + message


def _check_tag(domain_tag: str) -> None:
    if domain_tag not in DOMAIN_TAGS:
        raise UnknownDomainTag(domain_tag)


# --- signature schemes --------------------------------------------------------

class Ed25519Scheme:
    """Production scheme: deterministic Ed25519 over the framed message."""

    name = "ed25519"

    def keygen(self, seed: bytes) -> KeyPair:
        if not seed:
            raise EmptySeed("keygen seed must be non-empty")
        secret = hashlib.sha256(_KEYGEN_CONTEXT + seed).digest()
        private = Ed25519PrivateKey.from_private_bytes(secret)
        public = private.public_key().public_bytes_raw()
        return KeyPair(public_key=public, secret_key=secret, key_id=digest(public))

    def raw_sign(self, secret_key: bytes, message: bytes) -> bytes:
        return Ed25519PrivateKey.from_private_bytes(secret_key).sign(message)

    def raw_verify(self, public_key: bytes, message: bytes, sig: bytes) -> bool:
        try:
            Ed25519PublicKey.from_public_bytes(public_key).verify(sig, message)
            return True
        except (InvalidSignature, ValueError):
            return False


class NullScheme:
    """Forgeable stand-in: the "signature" is just the message digest.

    Anyone can produce it without the secret key, which is exactly what
    negative tests need to show that protocol guarantees rest on the
    signature scheme and not on format plumbing.
    """

    name = "null"

    def keygen(self, seed: bytes) -> KeyPair:
        if not seed:
            raise EmptySeed("keygen seed must be non-empty")
        public = b"null:" + hashlib.sha256(seed).digest()
        return KeyPair(public_key=public, secret_key=public, key_id=digest(public))

    def raw_sign(self, secret_key: bytes, message: bytes) -> bytes:
        return hashlib.sha256(message).digest()

    def raw_verify(self, public_key: bytes, message: bytes, sig: bytes) -> bool:
        return sig == hashlib.sha256(message).digest()


ED25519 = Ed25519Scheme()
NULL_SCHEME = NullScheme()


# --- module-level operations ---------------------------------------------------

def keygen(seed: bytes, scheme=ED25519) -> KeyPair:
    """Deterministic key pair: the same seed always yields the same keys."""
    return scheme.keygen(seed)


def sign(key: KeyPair, domain_tag: str, message: bytes, scheme=ED25519) -> Signature:
    _check_tag(domain_tag)
    raw = scheme.raw_sign(key.secret_key, _framed(domain_tag, message))
    return Signature(data=raw, signer_key_id=key.key_id, domain_tag=domain_tag)


def verify(public_key: bytes, domain_tag: str, message: bytes, sig: Signature, scheme=ED25519) -> bool:
    """True iff *sig* was produced over *message* under *domain_tag* by the
    holder of *public_key*.  Tag or key mismatches report False; only an
    unregistered tag raises."""
    _check_tag(domain_tag)
    if sig.domain_tag != domain_tag:
        return False
    if sig.signer_key_id != digest(public_key):
        return False
    return scheme.raw_verify(public_key, _framed(domain_tag, message), sig.data)


class KeyDirectory:
    """Public-key lookup by key id.  Public keys are public; every actor in
    a scenario shares one directory."""

    def __init__(self) -> None:
        self._keys: dict[Digest, bytes] = {}

    def add(self, public_key: bytes) -> Digest:
        key_id = digest(public_key)
        self._keys[key_id] = public_key
        return key_id

    def get(self, key_id: Digest) -> bytes | None:
        return self._keys.get(key_id)
