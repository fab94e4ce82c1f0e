"""Build, blind, countersign, and verify the three attestation artifacts."""

import dataclasses
import hashlib
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coopattest import crypto
from coopattest.attestation import (
    AttributeClaim,
    CounterSignedAttestation,
    SubjectRef,
    attestation_from_bytes,
    blind,
    build_plain,
    canonical_bytes,
    countersign,
    read_attestation,
    verify_countersigned,
    verify_pair,
    write_attestation,
)
from coopattest.errors import (
    DecodeError,
    EmptyAttributes,
    EmptyNotaryId,
    InvalidBlinded,
    InvalidValidityWindow,
    IssuerKeyMismatch,
    SubjectModeMismatch,
)

from conftest import make_claims, make_plain


class TestSubjectRef:
    def test_absent_requires_empty_value(self):
        with pytest.raises(ValueError):
            SubjectRef("absent", "bob")

    def test_handle_requires_at_prefix(self):
        with pytest.raises(ValueError):
            SubjectRef("handle", "sender")
        assert SubjectRef.handle("@sender").value == "@sender"

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            SubjectRef("pseudonym", "x")


class TestBuildPlain:
    def test_constructive_roundtrip(self, issuer):
        plain = make_plain(issuer)
        report = verify_pair(plain, blind(plain, SubjectRef.absent(), issuer), issuer.public_key)
        assert report.plain_signature

    def test_empty_window_rejected(self, issuer):
        with pytest.raises(InvalidValidityWindow):
            make_plain(issuer, issued_at=10, expires_at=10)

    def test_deterministic_id(self, issuer):
        a = make_plain(issuer, nonce=b"x" * 32)
        b = make_plain(issuer, nonce=b"x" * 32)
        assert a.attestation_id == b.attestation_id

    def test_empty_attributes_rejected(self, issuer):
        with pytest.raises(EmptyAttributes):
            make_plain(issuer, claims=[])

    def test_non_legal_subject_rejected(self, issuer):
        with pytest.raises(SubjectModeMismatch):
            build_plain(SubjectRef.absent(), make_claims(("a", "b")), issuer, "n", 0, 10, b"n" * 32)

    def test_short_nonce_rejected(self, issuer):
        with pytest.raises(ValueError):
            make_plain(issuer, nonce=b"short")


class TestBlind:
    def test_absent_substitute(self, issuer):
        plain = make_plain(issuer)
        blinded = blind(plain, SubjectRef.absent(), issuer)
        assert blinded.subject == SubjectRef.absent()
        assert blinded.attributes == plain.attributes
        # Independent recomputation of the linkage digest.
        assert blinded.plain_digest.value == hashlib.sha256(canonical_bytes(plain)).digest()

    def test_handle_substitute(self, issuer):
        plain = make_plain(issuer)
        blinded = blind(plain, SubjectRef.handle("@sender"), issuer)
        assert blinded.subject.value == "@sender"

    def test_identity_absent_from_blinded_bytes(self, issuer):
        plain = make_plain(issuer, identity="alice-legal-0001")
        blinded = blind(plain, SubjectRef.absent(), issuer)
        assert b"alice-legal-0001" not in canonical_bytes(blinded)

    def test_wrong_issuer_key(self, issuer):
        plain = make_plain(issuer)
        with pytest.raises(IssuerKeyMismatch):
            blind(plain, SubjectRef.absent(), crypto.keygen(b"other"))

    def test_legal_identity_substitute_rejected(self, issuer):
        plain = make_plain(issuer)
        with pytest.raises(SubjectModeMismatch):
            blind(plain, SubjectRef.legal("bob"), issuer)

    @given(st.integers(0, 10_000))
    @settings(max_examples=60)
    def test_blinding_removes_identity(self, n):
        # Identities are >= 8 bytes so incidental substrings cannot occur.
        issuer = crypto.keygen(b"prop-issuer")
        identity = f"member-{n:08d}-{hashlib.sha256(str(n).encode()).hexdigest()[:8]}"
        plain = make_plain(issuer, identity=identity)
        blinded = blind(plain, SubjectRef.absent(), issuer)
        assert identity.encode() not in canonical_bytes(blinded)


class TestVerifyPair:
    def test_matching_pair_passes_all(self, issuer):
        plain = make_plain(issuer)
        blinded = blind(plain, SubjectRef.absent(), issuer)
        report = verify_pair(plain, blinded, issuer.public_key)
        assert report.passed and report.failing() == []

    def test_tampered_attribute_fails_signature(self, issuer):
        plain = make_plain(issuer)
        blinded = blind(plain, SubjectRef.absent(), issuer)
        tampered = dataclasses.replace(
            blinded, attributes=(AttributeClaim("age-over-18", "false", "pds-rule:age-over-18"),)
        )
        report = verify_pair(plain, tampered, issuer.public_key)
        assert not report.blinded_signature
        assert not report.passed

    def test_wrong_plain_fails_digest_only(self, issuer):
        # Two independently built plains with identical claims and window:
        # every check but the hash linkage passes.
        a = make_plain(issuer, identity="alice-legal-0001", nonce=b"a" * 32)
        b = make_plain(issuer, identity="bobby-legal-0002", nonce=b"b" * 32)
        blinded_b = blind(b, SubjectRef.absent(), issuer)
        report = verify_pair(a, blinded_b, issuer.public_key)
        assert report.failing() == ["digest_match"]

    def test_diagonal_only(self, issuer):
        plains = [make_plain(issuer, identity=f"member-{i:08d}", nonce=bytes([i]) * 32)
                  for i in range(6)]
        blindeds = [blind(p, SubjectRef.absent(), issuer) for p in plains]
        for i, p in enumerate(plains):
            for j, b in enumerate(blindeds):
                assert verify_pair(p, b, issuer.public_key).passed == (i == j)


class TestCountersign:
    def test_roundtrip(self, issuer, notary_key):
        plain = make_plain(issuer)
        blinded = blind(plain, SubjectRef.absent(), issuer)
        csa = countersign(blinded, notary_key, "notary-1", 12, issuer_public_key=issuer.public_key)
        report = verify_countersigned(csa, issuer.public_key, notary_key.public_key, 12)
        assert report.passed

    def test_embedded_tamper_breaks_notary_signature(self, issuer, notary_key):
        plain = make_plain(issuer)
        blinded = blind(plain, SubjectRef.absent(), issuer)
        csa = countersign(blinded, notary_key, "notary-1", 12)
        tampered = dataclasses.replace(
            csa, blinded=dataclasses.replace(csa.blinded, legal_rep_id="evil")
        )
        report = verify_countersigned(tampered, issuer.public_key, notary_key.public_key, 12)
        assert not report.notary_signature

    def test_empty_notary_id_rejected(self, issuer, notary_key):
        blinded = blind(make_plain(issuer), SubjectRef.absent(), issuer)
        with pytest.raises(EmptyNotaryId):
            countersign(blinded, notary_key, "", 12)

    def test_invalid_blinded_rejected_when_key_supplied(self, issuer, notary_key):
        blinded = blind(make_plain(issuer), SubjectRef.absent(), issuer)
        forged = dataclasses.replace(blinded, legal_rep_id="evil")
        with pytest.raises(InvalidBlinded):
            countersign(forged, notary_key, "notary-1", 12, issuer_public_key=issuer.public_key)

    def test_envelope_fidelity(self, issuer, notary_key):
        blinded = blind(make_plain(issuer), SubjectRef.absent(), issuer)
        before = canonical_bytes(blinded)
        csa = countersign(blinded, notary_key, "notary-1", 12)
        assert canonical_bytes(csa.blinded) == before


class TestVerifyCountersigned:
    def _csa(self, issuer, notary_key, **kwargs):
        plain = make_plain(issuer, **kwargs)
        blinded = blind(plain, SubjectRef.absent(), issuer)
        return countersign(blinded, notary_key, "notary-1", plain.issued_at)

    def test_fresh_passes_at_issue_tick(self, issuer, notary_key):
        csa = self._csa(issuer, notary_key, issued_at=10, expires_at=100)
        assert verify_countersigned(csa, issuer.public_key, notary_key.public_key, 10).passed

    def test_expiry_boundary_is_exclusive(self, issuer, notary_key):
        csa = self._csa(issuer, notary_key, issued_at=10, expires_at=100)
        report = verify_countersigned(csa, issuer.public_key, notary_key.public_key, 100)
        assert report.failing() == ["not_expired"]
        assert report.expired_only

    def test_key_permutation_matrix(self, issuer, notary_key):
        csa = self._csa(issuer, notary_key)
        keys = {"issuer": issuer.public_key, "notary": notary_key.public_key,
                "other": crypto.keygen(b"stranger").public_key}
        for i_name, i_key in keys.items():
            for n_name, n_key in keys.items():
                report = verify_countersigned(csa, i_key, n_key, 12)
                assert report.issuer_signature == (i_name == "issuer")
                assert report.notary_signature == (n_name == "notary")

    def test_swapped_keys_fail_both(self, issuer, notary_key):
        csa = self._csa(issuer, notary_key)
        report = verify_countersigned(csa, notary_key.public_key, issuer.public_key, 12)
        assert not report.issuer_signature and not report.notary_signature


class TestSerialization:
    def test_file_roundtrip(self, tmp_path, issuer, notary_key):
        plain = make_plain(issuer)
        blinded = blind(plain, SubjectRef.handle("@sender"), issuer)
        csa = countersign(blinded, notary_key, "notary-1", 11)
        for artifact in (plain, blinded, csa):
            path = tmp_path / "artifact.att"
            write_attestation(path, artifact)
            assert read_attestation(path) == artifact

    def test_kind_discriminator_required(self):
        with pytest.raises(DecodeError):
            attestation_from_bytes(b'{"kind":"mystery"}')
        with pytest.raises(DecodeError):
            attestation_from_bytes(b'{"no_kind":1}')

    def test_parse_rejects_wrong_types(self, issuer):
        plain = make_plain(issuer)
        data = canonical_bytes(plain).replace(b'"issued_at":10', b'"issued_at":"10"')
        with pytest.raises(DecodeError):
            attestation_from_bytes(data)

    def test_mutation_suite(self, issuer, notary_key):
        """Single-byte mutations never yield a verifying countersigned artifact."""
        blinded = blind(make_plain(issuer), SubjectRef.absent(), issuer)
        csa = countersign(blinded, notary_key, "notary-1", 12)
        data = canonical_bytes(csa)
        rng = random.Random(0xC5A)
        false_accepts = 0
        for _ in range(300):
            mutated = bytearray(data)
            pos = rng.randrange(len(mutated))
            old = mutated[pos]
            new = rng.randrange(256)
            while new == old:
                new = rng.randrange(256)
            mutated[pos] = new
            try:
                parsed = attestation_from_bytes(bytes(mutated))
            except DecodeError:
                continue
            if not isinstance(parsed, CounterSignedAttestation):
                continue
            report = verify_countersigned(parsed, issuer.public_key, notary_key.public_key, 12)
            if report.passed:
                false_accepts += 1
        assert false_accepts == 0
