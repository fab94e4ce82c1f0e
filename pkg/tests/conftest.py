import pytest

from coopattest import crypto
from coopattest.attestation import AttributeClaim, SubjectRef, build_plain


@pytest.fixture
def issuer():
    return crypto.keygen(b"test-coop")


@pytest.fixture
def notary_key():
    return crypto.keygen(b"test-notary")


def make_claims(*pairs):
    return [AttributeClaim(name, value, f"pds-rule:{name}") for name, value in pairs]


def make_plain(issuer, identity="alice-legal-0001", claims=None, issued_at=10,
               expires_at=1000, nonce=b"n" * 32, legal_rep="notary-1"):
    claims = claims if claims is not None else make_claims(("age-over-18", "true"))
    return build_plain(
        SubjectRef.legal(identity), claims, issuer, legal_rep, issued_at, expires_at, nonce
    )
