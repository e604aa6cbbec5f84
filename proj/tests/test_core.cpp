#include "core/crypto.hpp"
#include "core/errors.hpp"

#include <doctest.h>

using namespace dircast;

TEST_CASE("digest is SHA-256") {
  // FIPS 180-2 test vector.
  CHECK(digest(std::string_view("abc")).hex() ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  auto d = digest(std::string_view("relay"));
  CHECK(Digest::from_hex(d.hex()) == d);
  CHECK_THROWS_AS(Digest::from_hex("abc"), std::invalid_argument);
}

TEST_CASE("nominal sizes of the byte model") {
  CHECK(kSignatureBytes == 502);
  CHECK(kDigestBytes == 53);
  CHECK(kRelayEntryBytes == 337);
}

TEST_CASE("base64 round trip") {
  Bytes b{0, 1, 2, 250, 251, 252, 253};
  CHECK(from_base64(to_base64(b)) == b);
  CHECK(to_base64(Bytes{'f', 'o', 'o'}) == "Zm9v");
}

TEST_CASE("signature schemes verify their own signatures only") {
  for (const char* name : {"ed25519", "keyed-hash"}) {
    CAPTURE(name);
    auto keys = Keyring::provision(make_scheme(name), 3, 11);
    auto sig = keys.signer(AuthorityId{2})->sign("statement");
    CHECK(sig.signer == AuthorityId{2});
    CHECK(keys.directory.verify(sig, "statement"));
    CHECK_FALSE(keys.directory.verify(sig, "other statement"));
    auto forged = sig;
    forged.signer = AuthorityId{3};
    CHECK_FALSE(keys.directory.verify(forged, "statement"));

    // Provisioning is deterministic in the seed.
    auto again = Keyring::provision(make_scheme(name), 3, 11);
    CHECK(again.directory.verify(sig, "statement"));
    auto other = Keyring::provision(make_scheme(name), 3, 12);
    CHECK_FALSE(other.directory.verify(sig, "statement"));
  }
}

TEST_CASE("sign meter separates protocol and document signatures") {
  auto keys = Keyring::provision(make_scheme("keyed-hash"), 2, 1);
  SignMeter meter;
  keys.signer(AuthorityId{1})->attach(&meter);
  keys.signer(AuthorityId{1})->sign("a");
  keys.signer(AuthorityId{1})->sign("b", SignPurpose::Document);
  CHECK(meter.protocol_signs == 1);
  CHECK(meter.document_signs == 1);
}

TEST_CASE("unknown signature scheme is rejected") {
  CHECK_THROWS(make_scheme("rsa"));
}
