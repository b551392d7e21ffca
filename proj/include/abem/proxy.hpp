#pragma once

// Untrusted transform service over framed TCP.
//
//   frame := length (4, big-endian, counts type + body) | type (1) | body
//
//   0x01 request       len(tk) (4) | tk | len(ct) (4) | ct
//   0x81 ok            encoded PartialDecryption
//   0x82 not satisfied (empty)
//   0xFF error         code (2, big-endian) | UTF-8 message
//
// One request in flight per connection. After an error reply the server
// closes the connection.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "abem/errors.hpp"
#include "abem/outsource.hpp"

namespace abem::proxy {

inline constexpr std::uint32_t kDefaultMaxFrame = 1u << 26;

enum class MessageType : std::uint8_t {
  TransformRequest = 0x01,
  TransformOk = 0x81,
  NotSatisfied = 0x82,
  Error = 0xFF,
};

enum class ErrorCode : std::uint16_t {
  Oversized = 0x0001,
  Decode = 0x0002,
  Internal = 0x00FF,
};

struct Frame {
  std::uint8_t type = 0;
  std::vector<std::uint8_t> body;

  friend bool operator==(const Frame&, const Frame&) = default;
};

std::vector<std::uint8_t> encode_frame(std::uint8_t type, std::span<const std::uint8_t> body);
inline std::vector<std::uint8_t> encode_frame(const Frame& f) {
  return encode_frame(f.type, f.body);
}

/// Parses exactly one frame occupying all of `bytes`. Throws DecodeError.
Frame decode_frame(std::span<const std::uint8_t> bytes, std::uint32_t max_frame = kDefaultMaxFrame);

struct TransformRequest {
  std::vector<std::uint8_t> tk;
  std::vector<std::uint8_t> ct;
};

std::vector<std::uint8_t> encode_request(std::span<const std::uint8_t> tk,
                                         std::span<const std::uint8_t> ct);
TransformRequest decode_request(std::span<const std::uint8_t> body);

std::vector<std::uint8_t> encode_error(std::uint16_t code, std::string_view message);
std::pair<std::uint16_t, std::string> decode_error(std::span<const std::uint8_t> body);

struct ServerOptions {
  CurveId curve = CurveId::Bls12_381;
  std::uint32_t max_frame = kDefaultMaxFrame;
  /// Set to run byzantine: every TransformOk carries T times a seeded
  /// pseudo-random nonidentity element.
  std::optional<std::uint64_t> byzantine_seed;
};

/// Server reply to one frame. `close` is set after errors.
struct Reply {
  Frame frame;
  bool close = false;
};

/// Request handling without sockets; the server is a loop around this.
Reply handle_frame(const Frame& request, const ServerOptions& options);

/// The perturbation a byzantine server multiplies into T for `request_body`.
TargetElement byzantine_factor(std::uint64_t seed, std::span<const std::uint8_t> request_body);

class TransformServer {
 public:
  /// `address` is "host:port"; port 0 picks an ephemeral port.
  TransformServer(std::string_view address, ServerOptions options);
  ~TransformServer();
  TransformServer(const TransformServer&) = delete;
  TransformServer& operator=(const TransformServer&) = delete;

  std::uint16_t port() const { return port_; }

  /// Blocks until stop().
  void run();
  /// Starts run() on a background thread.
  void start();
  /// Safe from any thread or a signal-driven flag poller.
  void stop();

 private:
  struct Connection;
  void serve_connection(int fd);
  void reap(bool all);

  ServerOptions options_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread runner_;
  std::mutex mu_;
  std::vector<std::unique_ptr<Connection>> connections_;
};

enum class NetworkFailure { Connect, Timeout, ProtocolViolation, ServerError, Closed };

class NetworkError : public Error {
 public:
  NetworkError(NetworkFailure failure, const std::string& what, std::uint16_t code = 0)
      : Error(ErrorKind::Network, what), failure_(failure), code_(code) {}

  NetworkFailure failure() const noexcept { return failure_; }
  /// Error code sent by the server, for ServerError.
  std::uint16_t code() const noexcept { return code_; }

 private:
  NetworkFailure failure_;
  std::uint16_t code_;
};

/// One round trip. nullopt means the server answered NotSatisfied.
/// Throws NetworkError.
std::optional<PartialDecryption> client_transform(
    std::string_view address, const TransformKey& tk, const Ciphertext& ct,
    std::chrono::milliseconds timeout = std::chrono::seconds(30));

/// Sends raw bytes, half-closes, and returns whatever the server sends back
/// before closing. For protocol tests.
std::vector<std::uint8_t> exchange_raw(std::string_view address,
                                       std::span<const std::uint8_t> bytes,
                                       std::chrono::milliseconds timeout);

}  // namespace abem::proxy
