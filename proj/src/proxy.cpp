#include "abem/proxy.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include "abem/codec.hpp"

namespace abem::proxy {

namespace {

using Clock = std::chrono::steady_clock;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

Frame error_frame(ErrorCode code, std::string_view message) {
  return Frame{static_cast<std::uint8_t>(MessageType::Error),
               encode_error(static_cast<std::uint16_t>(code), message)};
}

struct HostPort {
  std::string host;
  std::string port;
};

HostPort split_address(std::string_view address) {
  std::string_view host, port;
  if (address.starts_with('[')) {
    const auto close = address.find(']');
    if (close == std::string_view::npos || close + 1 >= address.size() || address[close + 1] != ':') {
      throw Error(ErrorKind::Usage, "bad address '" + std::string(address) + "'");
    }
    host = address.substr(1, close - 1);
    port = address.substr(close + 2);
  } else {
    const auto colon = address.rfind(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorKind::Usage, "address must be host:port, got '" + std::string(address) + "'");
    }
    host = address.substr(0, colon);
    port = address.substr(colon + 1);
  }
  if (port.empty() || !std::all_of(port.begin(), port.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorKind::Usage, "bad port in '" + std::string(address) + "'");
  }
  return {std::string(host.empty() ? "127.0.0.1" : host), std::string(port)};
}

struct AddrInfo {
  addrinfo* head = nullptr;
  ~AddrInfo() {
    if (head != nullptr) freeaddrinfo(head);
  }
};

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() { reset(); }
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }

  int fd() const { return fd_; }
  int release() { return std::exchange(fd_, -1); }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

// Waits for `events` on fd. Returns false on deadline; a null deadline waits
// in short slices so `stop` is honoured.
bool wait_for(int fd, short events, std::optional<Clock::time_point> deadline,
              const std::atomic<bool>* stop) {
  for (;;) {
    if (stop != nullptr && stop->load()) return false;
    int slice = 100;
    if (deadline) {
      const auto left =
          std::chrono::duration_cast<std::chrono::milliseconds>(*deadline - Clock::now()).count();
      if (left <= 0) return false;
      slice = static_cast<int>(std::min<long long>(left, stop != nullptr ? 100 : left));
    }
    pollfd p{fd, events, 0};
    const int r = ::poll(&p, 1, slice);
    if (r > 0) return true;
    if (r < 0 && errno != EINTR) return true;  // let the following syscall report it
  }
}

enum class IoStatus { Ok, Eof, Timeout, Failed };

IoStatus send_all(int fd, std::span<const std::uint8_t> data,
                  std::optional<Clock::time_point> deadline, const std::atomic<bool>* stop) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    if (!wait_for(fd, POLLOUT, deadline, stop)) return IoStatus::Timeout;
    const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN || errno == EWOULDBLOCK) continue;
      return IoStatus::Failed;
    }
    sent += static_cast<std::size_t>(n);
  }
  return IoStatus::Ok;
}

// Reads exactly out.size() bytes; `got` reports how many arrived.
IoStatus recv_exact(int fd, std::span<std::uint8_t> out, std::optional<Clock::time_point> deadline,
                    const std::atomic<bool>* stop, std::size_t& got) {
  got = 0;
  while (got < out.size()) {
    if (!wait_for(fd, POLLIN, deadline, stop)) return IoStatus::Timeout;
    const ssize_t n = ::recv(fd, out.data() + got, out.size() - got, 0);
    if (n == 0) return IoStatus::Eof;
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN || errno == EWOULDBLOCK) continue;
      return IoStatus::Failed;
    }
    got += static_cast<std::size_t>(n);
  }
  return IoStatus::Ok;
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL, 0) | O_NONBLOCK); }

Socket connect_to(std::string_view address, Clock::time_point deadline) {
  const HostPort hp = split_address(address);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  AddrInfo info;
  if (const int rc = ::getaddrinfo(hp.host.c_str(), hp.port.c_str(), &hints, &info.head); rc != 0) {
    throw NetworkError(NetworkFailure::Connect,
                       "cannot resolve " + hp.host + ": " + ::gai_strerror(rc));
  }
  std::string last = "no addresses";
  for (addrinfo* ai = info.head; ai != nullptr; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (s.fd() < 0) continue;
    set_nonblocking(s.fd());
    int rc = ::connect(s.fd(), ai->ai_addr, ai->ai_addrlen);
    if (rc != 0 && errno == EINPROGRESS) {
      if (!wait_for(s.fd(), POLLOUT, deadline, nullptr)) {
        throw NetworkError(NetworkFailure::Timeout, "timed out connecting to " + std::string(address));
      }
      int err = 0;
      socklen_t len = sizeof err;
      ::getsockopt(s.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
      rc = err == 0 ? 0 : -1;
      errno = err;
    }
    if (rc == 0) {
      const int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return s;
    }
    last = std::strerror(errno);
  }
  throw NetworkError(NetworkFailure::Connect, "cannot connect to " + std::string(address) + ": " + last);
}

}  // namespace

// ---------------------------------------------------------------- framing

std::vector<std::uint8_t> encode_frame(std::uint8_t type, std::span<const std::uint8_t> body) {
  if (body.size() >= 0xFFFFFFFFu) throw Error(ErrorKind::Usage, "frame body too large");
  std::vector<std::uint8_t> out;
  out.reserve(5 + body.size());
  put_u32(out, static_cast<std::uint32_t>(body.size() + 1));
  out.push_back(type);
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

Frame decode_frame(std::span<const std::uint8_t> bytes, std::uint32_t max_frame) {
  if (bytes.size() < 4) throw DecodeError(DecodeFailure::Truncated, "frame length");
  const std::uint32_t len = get_u32(bytes.data());
  if (len > max_frame) throw DecodeError(DecodeFailure::Malformed, "frame exceeds maximum size");
  if (len == 0) throw DecodeError(DecodeFailure::Malformed, "frame without a type byte");
  if (bytes.size() - 4 < len) throw DecodeError(DecodeFailure::Truncated, "frame body");
  if (bytes.size() - 4 > len) throw DecodeError(DecodeFailure::Malformed, "bytes after frame");
  return Frame{bytes[4], std::vector<std::uint8_t>(bytes.begin() + 5, bytes.end())};
}

std::vector<std::uint8_t> encode_request(std::span<const std::uint8_t> tk,
                                         std::span<const std::uint8_t> ct) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + tk.size() + ct.size());
  put_u32(out, static_cast<std::uint32_t>(tk.size()));
  out.insert(out.end(), tk.begin(), tk.end());
  put_u32(out, static_cast<std::uint32_t>(ct.size()));
  out.insert(out.end(), ct.begin(), ct.end());
  return out;
}

TransformRequest decode_request(std::span<const std::uint8_t> body) {
  TransformRequest req;
  std::size_t pos = 0;
  for (auto* dst : {&req.tk, &req.ct}) {
    if (body.size() - pos < 4) throw DecodeError(DecodeFailure::Truncated, "request length");
    const std::uint32_t n = get_u32(body.data() + pos);
    pos += 4;
    if (body.size() - pos < n) throw DecodeError(DecodeFailure::Truncated, "request field");
    dst->assign(body.begin() + static_cast<std::ptrdiff_t>(pos),
                body.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
  }
  if (pos != body.size()) throw DecodeError(DecodeFailure::Malformed, "bytes after request");
  return req;
}

std::vector<std::uint8_t> encode_error(std::uint16_t code, std::string_view message) {
  std::vector<std::uint8_t> out{static_cast<std::uint8_t>(code >> 8),
                                static_cast<std::uint8_t>(code)};
  out.insert(out.end(), message.begin(), message.end());
  return out;
}

std::pair<std::uint16_t, std::string> decode_error(std::span<const std::uint8_t> body) {
  if (body.size() < 2) throw DecodeError(DecodeFailure::Truncated, "error code");
  return {static_cast<std::uint16_t>((body[0] << 8) | body[1]),
          std::string(body.begin() + 2, body.end())};
}

// ---------------------------------------------------------------- handling

TargetElement byzantine_factor(std::uint64_t seed, std::span<const std::uint8_t> request_body) {
  std::vector<std::uint8_t> data;
  data.reserve(8 + request_body.size());
  for (int shift = 56; shift >= 0; shift -= 8) data.push_back(static_cast<std::uint8_t>(seed >> shift));
  data.insert(data.end(), request_body.begin(), request_body.end());
  Scalar z = Scalar::hash_to("ABEM/byzantine", data);
  if (z.is_zero()) z = Scalar::from_u64(1);
  return TargetElement::generator().pow(z);
}

Reply handle_frame(const Frame& request, const ServerOptions& options) {
  if (request.type != static_cast<std::uint8_t>(MessageType::TransformRequest)) {
    return {error_frame(ErrorCode::Decode, "unexpected message type"), true};
  }
  try {
    const TransformRequest req = decode_request(request.body);
    const auto tk = codec::decode<TransformKey>(req.tk, options.curve);
    const auto ct = codec::decode<Ciphertext>(req.ct, options.curve);
    auto partial = transform(tk, ct);
    if (!partial) return {Frame{static_cast<std::uint8_t>(MessageType::NotSatisfied), {}}, false};
    if (options.byzantine_seed) {
      partial->t = partial->t * byzantine_factor(*options.byzantine_seed, request.body);
    }
    return {Frame{static_cast<std::uint8_t>(MessageType::TransformOk), codec::encode(*partial)},
            false};
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Decode || e.kind() == ErrorKind::Usage) {
      return {error_frame(ErrorCode::Decode, e.what()), true};
    }
    return {error_frame(ErrorCode::Internal, "internal error"), true};
  } catch (const std::exception&) {
    return {error_frame(ErrorCode::Internal, "internal error"), true};
  }
}

// ------------------------------------------------------------------ server

struct TransformServer::Connection {
  std::thread thread;
  std::atomic<bool> done{false};
};

TransformServer::TransformServer(std::string_view address, ServerOptions options)
    : options_(options) {
  const HostPort hp = split_address(address);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  AddrInfo info;
  if (const int rc = ::getaddrinfo(hp.host.c_str(), hp.port.c_str(), &hints, &info.head); rc != 0) {
    throw NetworkError(NetworkFailure::Connect, "cannot resolve " + hp.host + ": " + ::gai_strerror(rc));
  }
  std::string last = "no addresses";
  for (addrinfo* ai = info.head; ai != nullptr; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (s.fd() < 0) continue;
    const int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(s.fd(), 64) == 0) {
      sockaddr_storage bound{};
      socklen_t len = sizeof bound;
      ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&bound), &len);
      port_ = ntohs(bound.ss_family == AF_INET6
                        ? reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port
                        : reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
      set_nonblocking(s.fd());
      listen_fd_ = s.release();
      return;
    }
    last = std::strerror(errno);
  }
  throw NetworkError(NetworkFailure::Connect, "cannot listen on " + std::string(address) + ": " + last);
}

TransformServer::~TransformServer() {
  stop();
  if (runner_.joinable()) runner_.join();
  reap(true);
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TransformServer::start() { runner_ = std::thread([this] { run(); }); }

void TransformServer::stop() { stopping_ = true; }

void TransformServer::reap(bool all) {
  std::lock_guard lock(mu_);
  auto it = connections_.begin();
  while (it != connections_.end()) {
    if (all || (*it)->done) {
      (*it)->thread.join();
      it = connections_.erase(it);
    } else {
      ++it;
    }
  }
}

void TransformServer::run() {
  while (!stopping_) {
    if (!wait_for(listen_fd_, POLLIN, std::nullopt, &stopping_)) break;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    set_nonblocking(fd);
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    reap(false);
    auto conn = std::make_unique<Connection>();
    Connection* raw = conn.get();
    conn->thread = std::thread([this, fd, raw] {
      serve_connection(fd);
      raw->done = true;
    });
    std::lock_guard lock(mu_);
    connections_.push_back(std::move(conn));
  }
  reap(true);
}

void TransformServer::serve_connection(int fd) {
  Socket sock(fd);
  const auto reply = [&](const Frame& f) {
    send_all(fd, encode_frame(f), std::nullopt, &stopping_);
  };
  for (;;) {
    std::uint8_t header[4];
    std::size_t got = 0;
    IoStatus st = recv_exact(fd, header, std::nullopt, &stopping_, got);
    if (st == IoStatus::Eof && got == 0) return;  // clean close between requests
    if (st != IoStatus::Ok) {
      if (st == IoStatus::Eof) reply(error_frame(ErrorCode::Decode, "truncated frame"));
      return;
    }
    const std::uint32_t len = get_u32(header);
    if (len > options_.max_frame) {
      reply(error_frame(ErrorCode::Oversized, "frame exceeds maximum size"));
      return;
    }
    if (len == 0) {
      reply(error_frame(ErrorCode::Decode, "frame without a type byte"));
      return;
    }
    std::vector<std::uint8_t> rest(len);
    st = recv_exact(fd, rest, std::nullopt, &stopping_, got);
    if (st != IoStatus::Ok) {
      if (st == IoStatus::Eof) reply(error_frame(ErrorCode::Decode, "truncated frame"));
      return;
    }
    Frame request{rest[0], std::vector<std::uint8_t>(rest.begin() + 1, rest.end())};
    rest.clear();
    rest.shrink_to_fit();
    const Reply r = handle_frame(request, options_);
    reply(r.frame);
    if (r.close) return;
  }
}

// ------------------------------------------------------------------ client

namespace {

Frame read_reply(int fd, Clock::time_point deadline) {
  std::uint8_t header[4];
  std::size_t got = 0;
  IoStatus st = recv_exact(fd, header, deadline, nullptr, got);
  if (st == IoStatus::Timeout) throw NetworkError(NetworkFailure::Timeout, "timed out waiting for reply");
  if (st != IoStatus::Ok) throw NetworkError(NetworkFailure::Closed, "connection closed before reply");
  const std::uint32_t len = get_u32(header);
  if (len == 0 || len > kDefaultMaxFrame) {
    throw NetworkError(NetworkFailure::ProtocolViolation, "bad reply frame length");
  }
  std::vector<std::uint8_t> rest(len);
  st = recv_exact(fd, rest, deadline, nullptr, got);
  if (st == IoStatus::Timeout) throw NetworkError(NetworkFailure::Timeout, "timed out reading reply");
  if (st != IoStatus::Ok) throw NetworkError(NetworkFailure::Closed, "connection closed mid-reply");
  return Frame{rest[0], std::vector<std::uint8_t>(rest.begin() + 1, rest.end())};
}

}  // namespace

std::optional<PartialDecryption> client_transform(std::string_view address, const TransformKey& tk,
                                                  const Ciphertext& ct,
                                                  std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  const auto request = encode_frame(static_cast<std::uint8_t>(MessageType::TransformRequest),
                                    encode_request(codec::encode(tk), codec::encode(ct)));
  Socket sock = connect_to(address, deadline);
  switch (send_all(sock.fd(), request, deadline, nullptr)) {
    case IoStatus::Ok: break;
    case IoStatus::Timeout: throw NetworkError(NetworkFailure::Timeout, "timed out sending request");
    default: throw NetworkError(NetworkFailure::Closed, "connection lost while sending request");
  }
  const Frame f = read_reply(sock.fd(), deadline);
  switch (static_cast<MessageType>(f.type)) {
    case MessageType::TransformOk:
      try {
        return codec::decode<PartialDecryption>(f.body, ct.curve);
      } catch (const DecodeError& e) {
        throw NetworkError(NetworkFailure::ProtocolViolation,
                           std::string("undecodable partial decryption: ") + e.what());
      }
    case MessageType::NotSatisfied:
      if (!f.body.empty()) throw NetworkError(NetworkFailure::ProtocolViolation, "non-empty NotSatisfied");
      return std::nullopt;
    case MessageType::Error: {
      std::pair<std::uint16_t, std::string> err;
      try {
        err = decode_error(f.body);
      } catch (const DecodeError&) {
        throw NetworkError(NetworkFailure::ProtocolViolation, "malformed error reply");
      }
      char code[8];
      std::snprintf(code, sizeof code, "0x%04X", err.first);
      throw NetworkError(NetworkFailure::ServerError,
                         std::string("server error ") + code + ": " + err.second, err.first);
    }
    default: {
      char type[8];
      std::snprintf(type, sizeof type, "0x%02X", f.type);
      throw NetworkError(NetworkFailure::ProtocolViolation,
                         std::string("unexpected message type ") + type);
    }
  }
}

std::vector<std::uint8_t> exchange_raw(std::string_view address, std::span<const std::uint8_t> bytes,
                                       std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  Socket sock = connect_to(address, deadline);
  if (send_all(sock.fd(), bytes, deadline, nullptr) != IoStatus::Ok) {
    throw NetworkError(NetworkFailure::Closed, "send failed");
  }
  ::shutdown(sock.fd(), SHUT_WR);
  std::vector<std::uint8_t> out;
  std::uint8_t buf[4096];
  for (;;) {
    if (!wait_for(sock.fd(), POLLIN, deadline, nullptr)) {
      throw NetworkError(NetworkFailure::Timeout, "timed out waiting for close");
    }
    const ssize_t n = ::recv(sock.fd(), buf, sizeof buf, 0);
    if (n == 0) break;
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      if (errno == ECONNRESET) break;
      throw NetworkError(NetworkFailure::Closed, std::strerror(errno));
    }
    out.insert(out.end(), buf, buf + n);
  }
  return out;
}

}  // namespace abem::proxy
