#include "abem/proxy.hpp"

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "abem/bench.hpp"
#include "proxy_corpus.hpp"
#include "support.hpp"

using namespace abem;
using testing::bytes;

namespace {

struct World {
  SeededRandom rng{71};
  KeyPair kp = setup(rng);
  SecretKey sk, weak;
  TransformKeyPair pair, weak_pair;
  Ciphertext ct;

  World() {
    const std::vector<std::string> attrs{"A", "B"};
    const std::vector<std::string> weak_attrs{"A"};
    sk = keygen(kp.pk, kp.mk, attrs, rng);
    weak = keygen(kp.pk, kp.mk, weak_attrs, rng);
    pair = gen_tk(kp.pk, sk, rng);
    weak_pair = gen_tk(kp.pk, weak, rng);
    ct = encrypt(kp.pk, policy::parse_policy("A and B"), bytes("over the wire"), rng);
  }
};

std::string local(const proxy::TransformServer& s) { return "127.0.0.1:" + std::to_string(s.port()); }

// Accepts one connection, reads a request frame, answers with `reply`.
class FakeServer {
 public:
  explicit FakeServer(std::vector<std::uint8_t> reply) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in a{};
    a.sin_family = AF_INET;
    a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    ::bind(fd_, reinterpret_cast<sockaddr*>(&a), sizeof a);
    ::listen(fd_, 1);
    socklen_t len = sizeof a;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&a), &len);
    port_ = ntohs(a.sin_port);
    thread_ = std::thread([this, reply = std::move(reply)] {
      const int c = ::accept(fd_, nullptr, nullptr);
      std::uint8_t header[4];
      ::recv(c, header, 4, MSG_WAITALL);
      const std::uint32_t n = (std::uint32_t{header[0]} << 24) | (header[1] << 16) | (header[2] << 8) | header[3];
      std::vector<std::uint8_t> body(n);
      ::recv(c, body.data(), n, MSG_WAITALL);
      ::send(c, reply.data(), reply.size(), MSG_NOSIGNAL);
      ::close(c);
    });
  }
  ~FakeServer() {
    thread_.join();
    ::close(fd_);
  }
  std::string address() const { return "127.0.0.1:" + std::to_string(port_); }

 private:
  int fd_;
  std::uint16_t port_;
  std::thread thread_;
};

proxy::NetworkFailure failure_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const proxy::NetworkError& e) {
    return e.failure();
  }
  FAIL("no network error");
  return proxy::NetworkFailure::Closed;
}

}  // namespace

TEST_CASE("golden frames") {
  for (const auto& g : corpus::golden_frames()) {
    CAPTURE(g.name);
    CHECK(proxy::encode_frame(g.frame) == g.wire);
    CHECK(proxy::decode_frame(g.wire) == g.frame);
  }
  const auto req = proxy::decode_request(corpus::golden_frames()[0].frame.body);
  CHECK(req.tk == std::vector<std::uint8_t>{0xAA});
  CHECK(req.ct == std::vector<std::uint8_t>{0xBB, 0xCC});
  CHECK(proxy::decode_error(corpus::golden_frames()[3].frame.body) ==
        std::pair<std::uint16_t, std::string>{0x0002, "bad"});

  CHECK_THROWS_AS(proxy::decode_frame(std::vector<std::uint8_t>{0, 0, 0, 0}), DecodeError);
  CHECK_THROWS_AS(proxy::decode_frame(std::vector<std::uint8_t>{0, 0, 0, 2, 1}), DecodeError);
  CHECK_THROWS_AS(proxy::decode_frame(std::vector<std::uint8_t>{0, 0, 0, 1, 1, 0}), DecodeError);
  CHECK_THROWS_AS(proxy::decode_frame(std::vector<std::uint8_t>{0, 0, 1, 0, 1}, 16), DecodeError);
}

TEST_CASE("request handling without sockets") {
  const World w;
  const auto tk = codec::encode(w.pair.tk);
  const auto ct = codec::encode(w.ct);
  proxy::ServerOptions opts;
  const auto ok = proxy::handle_frame({0x01, proxy::encode_request(tk, ct)}, opts);
  CHECK(ok.frame.type == 0x81);
  CHECK_FALSE(ok.close);
  CHECK(ok.frame.body == codec::encode(*transform(w.pair.tk, w.ct)));

  const auto ns = proxy::handle_frame({0x01, proxy::encode_request(codec::encode(w.weak_pair.tk), ct)}, opts);
  CHECK(ns.frame == proxy::Frame{0x82, {}});
  CHECK_FALSE(ns.close);

  const auto bad = proxy::handle_frame({0x01, proxy::encode_request(codec::encode(w.sk), ct)}, opts);
  CHECK(bad.frame.type == 0xFF);
  CHECK(proxy::decode_error(bad.frame.body).first == 0x0002);
  CHECK(bad.close);
}

TEST_CASE("live server: equivalence, statelessness, not satisfied") {
  const World w;
  proxy::TransformServer server("127.0.0.1:0", {});
  server.start();
  const auto local_partial = transform(w.pair.tk, w.ct);
  const auto a = proxy::client_transform(local(server), w.pair.tk, w.ct);
  const auto b = proxy::client_transform(local(server), w.pair.tk, w.ct);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(codec::encode(*a) == codec::encode(*local_partial));
  CHECK(codec::encode(*a) == codec::encode(*b));
  CHECK(recover(w.kp.pk, w.pair.rk, w.ct, *a) == bytes("over the wire"));
  CHECK_FALSE(proxy::client_transform(local(server), w.weak_pair.tk, w.ct).has_value());

  // Several requests on one connection, answered in order.
  const auto req = corpus::request_frame(codec::encode(w.pair.tk), codec::encode(w.ct));
  const auto weak_req = corpus::request_frame(codec::encode(w.weak_pair.tk), codec::encode(w.ct));
  std::vector<std::uint8_t> stream = req;
  stream.insert(stream.end(), weak_req.begin(), weak_req.end());
  stream.insert(stream.end(), req.begin(), req.end());
  const auto replies = proxy::exchange_raw(local(server), stream, std::chrono::seconds(10));
  const auto ok = proxy::encode_frame(0x81, codec::encode(*local_partial));
  std::vector<std::uint8_t> expected = ok;
  const auto ns = proxy::encode_frame(0x82, {});
  expected.insert(expected.end(), ns.begin(), ns.end());
  expected.insert(expected.end(), ok.begin(), ok.end());
  CHECK(replies == expected);
  server.stop();
}

TEST_CASE("concurrent clients") {
  const World w;
  proxy::TransformServer server("127.0.0.1:0", {});
  server.start();
  const auto expected = codec::encode(*transform(w.pair.tk, w.ct));
  std::atomic<int> good{0};
  std::vector<std::thread> clients;
  for (int i = 0; i < 8; ++i) {
    clients.emplace_back([&] {
      const auto p = proxy::client_transform(local(server), w.pair.tk, w.ct);
      if (p && codec::encode(*p) == expected) ++good;
    });
  }
  for (auto& t : clients) t.join();
  CHECK(good == 8);
}

TEST_CASE("malformed frames get the specified error and a closed connection") {
  const World w;
  const auto cases = corpus::malformed_frames(codec::encode(w.pair.tk), codec::encode(w.ct),
                                              codec::encode(w.sk), codec::encode(w.kp.mk),
                                              codec::encode(w.pair.rk));
  CHECK(cases.size() >= 20);
  proxy::TransformServer server("127.0.0.1:0", {});
  server.start();
  for (const auto& c : cases) {
    CAPTURE(c.name);
    const auto reply = proxy::exchange_raw(local(server), c.stream, std::chrono::seconds(10));
    const auto frame = proxy::decode_frame(reply);  // exactly one frame, then close
    CHECK(frame.type == 0xFF);
    CHECK(proxy::decode_error(frame.body).first == c.code);
  }
}

TEST_CASE("configured frame limit") {
  const World w;
  proxy::ServerOptions opts;
  opts.max_frame = 1024;
  proxy::TransformServer server("127.0.0.1:0", opts);
  server.start();
  try {
    (void)proxy::client_transform(local(server), w.pair.tk, w.ct);
    FAIL("oversized request accepted");
  } catch (const proxy::NetworkError& e) {
    CHECK(e.failure() == proxy::NetworkFailure::ServerError);
    CHECK(e.code() == 0x0001);
  }
}

TEST_CASE("byzantine server") {
  const World w;
  proxy::ServerOptions opts;
  opts.byzantine_seed = 99;
  proxy::TransformServer server("127.0.0.1:0", opts);
  server.start();
  const auto honest = *transform(w.pair.tk, w.ct);
  const auto a = proxy::client_transform(local(server), w.pair.tk, w.ct);
  const auto b = proxy::client_transform(local(server), w.pair.tk, w.ct);
  REQUIRE(a.has_value());
  CHECK(codec::encode(*a) == codec::encode(*b));
  CHECK_FALSE(a->t == honest.t);
  const auto body = proxy::encode_request(codec::encode(w.pair.tk), codec::encode(w.ct));
  CHECK(a->t == honest.t * proxy::byzantine_factor(99, body));
  CHECK_FALSE(proxy::byzantine_factor(99, body) == proxy::byzantine_factor(100, body));
  CHECK_THROWS_AS(recover(w.kp.pk, w.pair.rk, w.ct, *a), Error);
  CHECK_FALSE(proxy::client_transform(local(server), w.weak_pair.tk, w.ct).has_value());
}

TEST_CASE("client failures") {
  const World w;
  {
    FakeServer fake(proxy::encode_frame(0x55, {}));
    CHECK(failure_of([&] { proxy::client_transform(fake.address(), w.pair.tk, w.ct); }) ==
          proxy::NetworkFailure::ProtocolViolation);
  }
  {
    FakeServer fake(proxy::encode_frame(0x81, std::vector<std::uint8_t>{1, 2, 3}));
    CHECK(failure_of([&] { proxy::client_transform(fake.address(), w.pair.tk, w.ct); }) ==
          proxy::NetworkFailure::ProtocolViolation);
  }
  {
    FakeServer fake({});
    CHECK(failure_of([&] { proxy::client_transform(fake.address(), w.pair.tk, w.ct); }) ==
          proxy::NetworkFailure::Closed);
  }
  {
    // Listening socket that never answers.
    proxy::TransformServer idle("127.0.0.1:0", {});
    const auto start = std::chrono::steady_clock::now();
    CHECK(failure_of([&] {
            proxy::client_transform(local(idle), w.pair.tk, w.ct, std::chrono::milliseconds(300));
          }) == proxy::NetworkFailure::Timeout);
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(5));
  }
  {
    std::uint16_t port;
    {
      proxy::TransformServer gone("127.0.0.1:0", {});
      port = gone.port();
    }
    const auto start = std::chrono::steady_clock::now();
    CHECK(failure_of([&] {
            proxy::client_transform("127.0.0.1:" + std::to_string(port), w.pair.tk, w.ct,
                                    std::chrono::seconds(2));
          }) == proxy::NetworkFailure::Connect);
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(3));
  }
  CHECK_THROWS_AS(proxy::client_transform("no-port", w.pair.tk, w.ct), Error);
}
