#include "core/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace dircast {
namespace {

struct SodiumInit {
  SodiumInit() {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  }
};

void ensure_sodium() { static const SodiumInit init; }

// Stretch (seed, id) into 32 bytes of key seed material.
std::array<std::uint8_t, 32> derive_seed(std::uint64_t seed, AuthorityId id, std::string_view tag) {
  ensure_sodium();
  std::array<std::uint8_t, 32> out{};
  std::string input(tag);
  for (int i = 0; i < 8; ++i) input.push_back(static_cast<char>((seed >> (8 * i)) & 0xff));
  for (int i = 0; i < 4; ++i) input.push_back(static_cast<char>((id.index >> (8 * i)) & 0xff));
  crypto_generichash(out.data(), out.size(), reinterpret_cast<const unsigned char*>(input.data()),
                     input.size(), nullptr, 0);
  return out;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string Digest::hex() const {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (auto b : bytes) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xf]);
  }
  return out;
}

Digest Digest::from_hex(std::string_view hex) {
  Digest d;
  if (hex.size() != 64) throw std::invalid_argument("digest must be 64 hex characters");
  for (std::size_t i = 0; i < 32; ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("digest contains a non-hex character");
    d.bytes[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return d;
}

Digest digest(std::string_view message) {
  ensure_sodium();
  Digest d;
  crypto_hash_sha256(d.bytes.data(), reinterpret_cast<const unsigned char*>(message.data()),
                     message.size());
  return d;
}

Digest digest(std::span<const std::uint8_t> message) {
  ensure_sodium();
  Digest d;
  crypto_hash_sha256(d.bytes.data(), message.data(), message.size());
  return d;
}

std::string to_base64(std::span<const std::uint8_t> bytes) {
  ensure_sodium();
  constexpr int variant = sodium_base64_VARIANT_ORIGINAL;
  std::string out(sodium_base64_ENCODED_LEN(bytes.size(), variant), '\0');
  sodium_bin2base64(out.data(), out.size(), bytes.data(), bytes.size(), variant);
  out.resize(std::strlen(out.c_str()));
  return out;
}

Bytes from_base64(std::string_view text) {
  ensure_sodium();
  Bytes out(text.size());
  std::size_t len = 0;
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &len, nullptr,
                        sodium_base64_VARIANT_ORIGINAL) != 0) {
    throw std::invalid_argument("malformed base64");
  }
  out.resize(len);
  return out;
}

KeyPair Ed25519Scheme::keygen(std::uint64_t seed, AuthorityId id) const {
  auto material = derive_seed(seed, id, "ed25519");
  KeyPair kp;
  kp.secret.resize(crypto_sign_SECRETKEYBYTES);
  kp.verification.resize(crypto_sign_PUBLICKEYBYTES);
  crypto_sign_seed_keypair(kp.verification.data(), kp.secret.data(), material.data());
  return kp;
}

Bytes Ed25519Scheme::sign(const Bytes& secret, std::string_view message) const {
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr, reinterpret_cast<const unsigned char*>(message.data()),
                       message.size(), secret.data());
  return sig;
}

bool Ed25519Scheme::verify(const Bytes& verification, std::string_view message,
                           std::span<const std::uint8_t> sig) const {
  if (sig.size() != crypto_sign_BYTES || verification.size() != crypto_sign_PUBLICKEYBYTES) {
    return false;
  }
  return crypto_sign_verify_detached(sig.data(),
                                     reinterpret_cast<const unsigned char*>(message.data()),
                                     message.size(), verification.data()) == 0;
}

KeyPair KeyedHashScheme::keygen(std::uint64_t seed, AuthorityId id) const {
  auto material = derive_seed(seed, id, "keyed-hash");
  KeyPair kp;
  kp.secret.assign(material.begin(), material.end());
  kp.verification = kp.secret;
  return kp;
}

Bytes KeyedHashScheme::sign(const Bytes& secret, std::string_view message) const {
  ensure_sodium();
  Bytes tag(16);
  crypto_generichash(tag.data(), tag.size(), reinterpret_cast<const unsigned char*>(message.data()),
                     message.size(), secret.data(), secret.size());
  return tag;
}

bool KeyedHashScheme::verify(const Bytes& verification, std::string_view message,
                             std::span<const std::uint8_t> sig) const {
  if (sig.size() != 16) return false;
  Bytes expected = sign(verification, message);
  return sodium_memcmp(expected.data(), sig.data(), expected.size()) == 0;
}

std::shared_ptr<const SignatureScheme> make_scheme(std::string_view name) {
  if (name == "ed25519") return std::make_shared<Ed25519Scheme>();
  if (name == "keyed-hash" || name == "mock") return std::make_shared<KeyedHashScheme>();
  throw std::invalid_argument("unknown signature scheme '" + std::string(name) + "'");
}

PublicKeyDirectory::PublicKeyDirectory(std::shared_ptr<const SignatureScheme> scheme,
                                       std::vector<Bytes> verification_keys)
    : scheme_(std::move(scheme)), keys_(std::move(verification_keys)) {}

bool PublicKeyDirectory::verify(const Signature& sig, std::string_view message) const {
  if (!contains(sig.signer)) return false;
  return scheme_->verify(keys_[sig.signer.index - 1], message, sig.bytes);
}

Signature Signer::sign(std::string_view message, SignPurpose purpose) const {
  if (meter_) {
    if (purpose == SignPurpose::Protocol)
      ++meter_->protocol_signs;
    else
      ++meter_->document_signs;
  }
  Signature sig{id_, scheme_->sign(secret_, message)};
  if (registry_) registry_->insert(sig);
  return sig;
}

Keyring Keyring::provision(std::shared_ptr<const SignatureScheme> scheme, std::uint32_t n,
                           std::uint64_t seed) {
  Keyring ring;
  std::vector<Bytes> verification;
  verification.reserve(n);
  for (std::uint32_t i = 1; i <= n; ++i) {
    auto kp = scheme->keygen(seed, AuthorityId{i});
    verification.push_back(kp.verification);
    ring.signers.push_back(std::make_shared<Signer>(AuthorityId{i}, std::move(kp.secret), scheme));
  }
  ring.directory = PublicKeyDirectory(scheme, std::move(verification));
  return ring;
}

}  // namespace dircast
