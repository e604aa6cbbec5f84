#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dircast {

// Byte-model constants used for accounting. They describe the nominal sizes of
// real Tor directory objects and are independent of what the in-process
// scheme actually emits.
inline constexpr std::uint64_t kSignatureBytes = 502;
inline constexpr std::uint64_t kDigestBytes = 53;
inline constexpr std::uint64_t kRelayEntryBytes = 337;

/// One directory authority, P1..Pn. Ordering by index decides "largest ID"
/// ties during aggregation.
struct AuthorityId {
  std::uint32_t index = 0;

  constexpr auto operator<=>(const AuthorityId&) const = default;
  std::string name() const { return "P" + std::to_string(index); }
};

using Bytes = std::vector<std::uint8_t>;

struct Digest {
  static constexpr std::uint64_t nominal_length = kDigestBytes;
  std::array<std::uint8_t, 32> bytes{};

  auto operator<=>(const Digest&) const = default;
  std::string hex() const;
  static Digest from_hex(std::string_view hex);  // throws std::invalid_argument
};

Digest digest(std::string_view message);
Digest digest(std::span<const std::uint8_t> message);

struct Signature {
  static constexpr std::uint64_t nominal_length = kSignatureBytes;
  AuthorityId signer;
  Bytes bytes;

  auto operator<=>(const Signature&) const = default;
};

std::string to_base64(std::span<const std::uint8_t> bytes);
Bytes from_base64(std::string_view text);  // throws std::invalid_argument

struct KeyPair {
  Bytes secret;
  Bytes verification;
};

/// Pluggable signing backend. Implementations must be deterministic given the
/// provisioning seed so that scenario runs are reproducible.
class SignatureScheme {
 public:
  virtual ~SignatureScheme() = default;
  virtual std::string_view name() const = 0;
  virtual KeyPair keygen(std::uint64_t seed, AuthorityId id) const = 0;
  virtual Bytes sign(const Bytes& secret, std::string_view message) const = 0;
  virtual bool verify(const Bytes& verification, std::string_view message,
                      std::span<const std::uint8_t> sig) const = 0;
};

/// Ed25519 through libsodium.
class Ed25519Scheme final : public SignatureScheme {
 public:
  std::string_view name() const override { return "ed25519"; }
  KeyPair keygen(std::uint64_t seed, AuthorityId id) const override;
  Bytes sign(const Bytes& secret, std::string_view message) const override;
  bool verify(const Bytes& verification, std::string_view message,
              std::span<const std::uint8_t> sig) const override;
};

/// Keyed BLAKE2b tags. The "verification key" is the tag key itself, so this
/// is only unforgeable because adversary code never receives the directory's
/// key material; it exists for fast deterministic fuzzing.
class KeyedHashScheme final : public SignatureScheme {
 public:
  std::string_view name() const override { return "keyed-hash"; }
  KeyPair keygen(std::uint64_t seed, AuthorityId id) const override;
  Bytes sign(const Bytes& secret, std::string_view message) const override;
  bool verify(const Bytes& verification, std::string_view message,
              std::span<const std::uint8_t> sig) const override;
};

std::shared_ptr<const SignatureScheme> make_scheme(std::string_view name);

/// Counters owned by the simulator. Signers bump them when attached.
struct SignMeter {
  std::uint64_t protocol_signs = 0;
  std::uint64_t document_signs = 0;
};

enum class SignPurpose { Protocol, Document };

/// Every signature produced by the signers that record into it. The simulator
/// keeps one for honest authorities so checks can prove that any honest-looking
/// signature the adversary emits is a copy of a genuine one.
using SignatureRegistry = std::set<Signature>;

class PublicKeyDirectory {
 public:
  PublicKeyDirectory() = default;
  PublicKeyDirectory(std::shared_ptr<const SignatureScheme> scheme,
                     std::vector<Bytes> verification_keys);

  std::uint32_t size() const { return static_cast<std::uint32_t>(keys_.size()); }
  bool contains(AuthorityId id) const { return id.index >= 1 && id.index <= size(); }
  bool verify(const Signature& sig, std::string_view message) const;
  const SignatureScheme& scheme() const { return *scheme_; }

 private:
  std::shared_ptr<const SignatureScheme> scheme_;
  std::vector<Bytes> keys_;  // index i-1 -> key of P_i
};

class Signer {
 public:
  Signer(AuthorityId id, Bytes secret, std::shared_ptr<const SignatureScheme> scheme)
      : id_(id), secret_(std::move(secret)), scheme_(std::move(scheme)) {}

  AuthorityId id() const { return id_; }
  void attach(SignMeter* meter) { meter_ = meter; }
  void record_into(SignatureRegistry* registry) { registry_ = registry; }
  Signature sign(std::string_view message, SignPurpose purpose = SignPurpose::Protocol) const;

 private:
  AuthorityId id_;
  Bytes secret_;
  std::shared_ptr<const SignatureScheme> scheme_;
  SignMeter* meter_ = nullptr;
  SignatureRegistry* registry_ = nullptr;
};

/// Keys for one scenario. Signers are handed out individually so that honest
/// keys never reach adversary code.
struct Keyring {
  PublicKeyDirectory directory;
  std::vector<std::shared_ptr<Signer>> signers;  // index i-1 -> P_i

  static Keyring provision(std::shared_ptr<const SignatureScheme> scheme, std::uint32_t n,
                           std::uint64_t seed);
  std::shared_ptr<Signer> signer(AuthorityId id) const { return signers.at(id.index - 1); }
};

}  // namespace dircast
