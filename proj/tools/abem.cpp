// abem: command-line front end for the ABE library.

#include <fcntl.h>
#include <unistd.h>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "abem/bench.hpp"
#include "abem/codec.hpp"
#include "abem/errors.hpp"
#include "abem/outsource.hpp"
#include "abem/proxy.hpp"
#include "abem/random.hpp"
#include "abem/scheme.hpp"

namespace fs = std::filesystem;
using namespace abem;

namespace {

enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kDecode = 3,
  kUnsatisfied = 4,
  kAuthentication = 5,
  kVerification = 6,
  kNetwork = 7,
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage: return kUsage;
    case ErrorKind::Decode: return kDecode;
    case ErrorKind::Unsatisfied: return kUnsatisfied;
    case ErrorKind::Authentication: return kAuthentication;
    case ErrorKind::Verification:
    case ErrorKind::EchoMismatch: return kVerification;
    case ErrorKind::Network: return kNetwork;
    default: return kFailure;
  }
}

struct Globals {
  bool armor = false;
  std::string seed;
};

Globals g;

std::unique_ptr<RandomSource> make_rng() {
  if (g.seed.empty()) return std::make_unique<SystemRandom>();
  return std::make_unique<SeededRandom>(g.seed);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Usage, "cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Temp file in the target directory, fsync, then rename over the target.
void write_file(const std::string& path, std::span<const std::uint8_t> data) {
  const fs::path target(path);
  const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
  std::string tmpl = (dir / ("." + target.filename().string() + ".XXXXXX")).string();
  const int fd = ::mkstemp(tmpl.data());
  if (fd < 0) throw Error(ErrorKind::Usage, "cannot write '" + path + "'");
  std::size_t off = 0;
  bool ok = true;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      ok = false;
      break;
    }
    off += static_cast<std::size_t>(n);
  }
  ok = ok && ::fsync(fd) == 0;
  ok = (::close(fd) == 0) && ok;
  if (!ok || std::rename(tmpl.c_str(), path.c_str()) != 0) {
    ::unlink(tmpl.c_str());
    throw Error(ErrorKind::Usage, "cannot write '" + path + "'");
  }
}

void write_object(const std::string& path, const std::vector<std::uint8_t>& encoded) {
  if (!g.armor) {
    write_file(path, encoded);
    return;
  }
  const std::string text = codec::armor(encoded);
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

template <typename T>
T load(const std::string& path) {
  auto bytes = read_file(path);
  if (codec::looks_armored(bytes)) {
    bytes = codec::dearmor(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }
  return codec::decode<T>(bytes, default_curve());
}

std::vector<std::string> split_attrs(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string a;
    while (std::getline(ss, a, ',')) {
      if (a.find_first_not_of(" \t") != std::string::npos) out.push_back(a);
    }
  }
  return out;
}

void print_verified() { std::cout << "VERIFIED" << std::endl; }

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ciphertext-policy ABE with cached encryption machines and outsourced decryption"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--armor", g.armor, "Write objects as ASCII armor");
  app.add_option("--seed", g.seed, "Deterministic randomness (testing only)");

  std::string pk_path, mk_path, sk_path, tk_path, rk_path, em_path, in_path, out_path, partial_path;
  std::string policy_text, proxy_addr, msg_path, build_em_path;
  std::vector<std::string> attrs;

  auto* setup_cmd = app.add_subcommand("setup", "Generate public and master keys");
  setup_cmd->add_option("--pk", pk_path, "Public key output")->required();
  setup_cmd->add_option("--mk", mk_path, "Master key output")->required();

  auto* keygen_cmd = app.add_subcommand("keygen", "Issue a secret key for an attribute set");
  keygen_cmd->add_option("--pk", pk_path)->required();
  keygen_cmd->add_option("--mk", mk_path)->required();
  keygen_cmd->add_option("--attrs", attrs, "Attributes, comma separated or repeated")->required();
  keygen_cmd->add_option("--out", out_path)->required();

  auto* enc_cmd = app.add_subcommand("encrypt", "Encrypt a file under a policy");
  enc_cmd->add_option("--pk", pk_path)->required();
  auto* policy_opt = enc_cmd->add_option("--policy", policy_text, "Policy text");
  auto* em_opt = enc_cmd->add_option("--em-file", em_path, "Encrypt with a saved encryption machine");
  enc_cmd->add_option("--build-em", build_em_path, "Build an encryption machine for --policy and save it")
      ->needs(policy_opt);
  enc_cmd->add_option("--in", in_path, "Plaintext file");
  enc_cmd->add_option("--out", out_path, "Ciphertext output");
  policy_opt->excludes(em_opt);

  auto* dec_cmd = app.add_subcommand("decrypt", "Decrypt with a secret key");
  dec_cmd->add_option("--pk", pk_path)->required();
  dec_cmd->add_option("--sk", sk_path)->required();
  dec_cmd->add_option("--in", in_path)->required();
  dec_cmd->add_option("--out", out_path)->required();

  auto* gentk_cmd = app.add_subcommand("gen-tk", "Split a secret key into transform and retrieval keys");
  gentk_cmd->add_option("--pk", pk_path)->required();
  gentk_cmd->add_option("--sk", sk_path)->required();
  gentk_cmd->add_option("--tk", tk_path, "Transform key output")->required();
  gentk_cmd->add_option("--rk", rk_path, "Retrieval key output")->required();

  int timeout_ms = 30000;
  auto* transform_cmd = app.add_subcommand("transform", "Partially decrypt, locally or via a proxy");
  transform_cmd->add_option("--tk", tk_path)->required();
  transform_cmd->add_option("--in", in_path)->required();
  transform_cmd->add_option("--out", out_path)->required();
  transform_cmd->add_option("--proxy", proxy_addr, "host:port of a transform server");
  transform_cmd->add_option("--timeout-ms", timeout_ms)->capture_default_str();

  auto* recover_cmd = app.add_subcommand("recover", "Finish decryption from a partial decryption");
  recover_cmd->add_option("--pk", pk_path)->required();
  recover_cmd->add_option("--rk", rk_path)->required();
  recover_cmd->add_option("--in", in_path)->required();
  recover_cmd->add_option("--partial", partial_path)->required();
  recover_cmd->add_option("--out", out_path)->required();

  auto* verify_cmd = app.add_subcommand("verify", "Check a plaintext against a ciphertext's tag");
  verify_cmd->add_option("--pk", pk_path)->required();
  verify_cmd->add_option("--in", in_path, "Ciphertext")->required();
  verify_cmd->add_option("--msg", msg_path, "Plaintext to check")->required();
  auto* vsk = verify_cmd->add_option("--sk", sk_path, "Secret key used to recover the witness");
  auto* vrk = verify_cmd->add_option("--rk", rk_path, "Retrieval key (with --partial)");
  auto* vpart = verify_cmd->add_option("--partial", partial_path);
  vsk->excludes(vrk)->excludes(vpart);
  vrk->needs(vpart);
  vpart->needs(vrk);

  std::string mode = "reuse-sweep";
  bench::BenchConfig bench_config;
  std::vector<std::size_t> sizes{1u << 20, 16u << 20, 64u << 20};
  std::vector<std::size_t> counts{1, 5, 10, 25, 50, 100};
  std::size_t message_bytes = 1024;
  auto* bench_cmd = app.add_subcommand("bench", "Time fresh versus cached encryption, write CSV");
  bench_cmd->add_option("--mode", mode)->check(CLI::IsMember({"size-sweep", "reuse-sweep"}))->capture_default_str();
  bench_cmd->add_option("--levels", bench_config.levels)->capture_default_str();
  bench_cmd->add_option("--leaves", bench_config.leaves)->capture_default_str();
  bench_cmd->add_option("--reps", bench_config.reps)->check(CLI::Range(5, 1000000))->capture_default_str();
  bench_cmd->add_option("--sizes", sizes, "Message sizes in bytes (size-sweep)")->delimiter(',');
  bench_cmd->add_option("--counts", counts, "Encryption counts (reuse-sweep)")->delimiter(',');
  bench_cmd->add_option("--message-bytes", message_bytes, "Message size for reuse-sweep")->capture_default_str();
  bench_cmd->add_option("--out", out_path)->required();

  std::size_t levels = 10, leaves = 100;
  auto* tree_cmd = app.add_subcommand("gen-tree", "Print a random policy and an attribute set satisfying it");
  tree_cmd->add_option("--levels", levels)->capture_default_str();
  tree_cmd->add_option("--leaves", leaves)->capture_default_str();

  std::string listen = "127.0.0.1:7878";
  proxy::ServerOptions server_options;
  bool byzantine = false;
  std::uint64_t byzantine_seed = 0;
  auto* serve_cmd = app.add_subcommand("serve", "Run a transform server");
  serve_cmd->add_option("--listen", listen)->capture_default_str();
  serve_cmd->add_option("--max-frame", server_options.max_frame)->capture_default_str();
  serve_cmd->add_flag("--byzantine", byzantine, "Corrupt every partial decryption");
  serve_cmd->add_option("--byzantine-seed", byzantine_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    const CurveId curve = default_curve();
    auto rng = make_rng();

    if (*setup_cmd) {
      const KeyPair kp = setup(*rng, curve);
      write_object(pk_path, codec::encode(kp.pk));
      write_object(mk_path, codec::encode(kp.mk));
    } else if (*keygen_cmd) {
      const auto pk = load<PublicKey>(pk_path);
      const auto mk = load<MasterKey>(mk_path);
      write_object(out_path, codec::encode(keygen(pk, mk, split_attrs(attrs), *rng)));
    } else if (*enc_cmd) {
      const auto pk = load<PublicKey>(pk_path);
      if (policy_text.empty() && em_path.empty()) {
        throw Error(ErrorKind::Usage, "encrypt needs --policy or --em-file");
      }
      const bool encrypting = !in_path.empty() || !out_path.empty();
      if (encrypting && (in_path.empty() || out_path.empty())) {
        throw Error(ErrorKind::Usage, "encrypt needs both --in and --out");
      }
      if (!encrypting && build_em_path.empty()) throw Error(ErrorKind::Usage, "nothing to do");

      std::optional<EncryptionMachine> em;
      if (!em_path.empty()) {
        em = load<EncryptionMachine>(em_path);
      } else if (!build_em_path.empty()) {
        em = build_em(pk, policy::parse_policy(policy_text), *rng);
        write_object(build_em_path, codec::encode(*em));
      }
      if (encrypting) {
        const auto msg = read_file(in_path);
        const Ciphertext ct = em ? em_encrypt(pk, *em, msg, *rng)
                                 : encrypt(pk, policy::parse_policy(policy_text), msg, *rng);
        write_object(out_path, codec::encode(ct));
      }
    } else if (*dec_cmd) {
      const auto pk = load<PublicKey>(pk_path);
      const auto sk = load<SecretKey>(sk_path);
      const auto ct = load<Ciphertext>(in_path);
      write_file(out_path, decrypt(pk, sk, ct));
      print_verified();
    } else if (*gentk_cmd) {
      const auto pk = load<PublicKey>(pk_path);
      const auto sk = load<SecretKey>(sk_path);
      const auto pair = gen_tk(pk, sk, *rng);
      write_object(tk_path, codec::encode(pair.tk));
      write_object(rk_path, codec::encode(pair.rk));
    } else if (*transform_cmd) {
      const auto tk = load<TransformKey>(tk_path);
      const auto ct = load<Ciphertext>(in_path);
      const auto partial = proxy_addr.empty()
                               ? transform(tk, ct)
                               : proxy::client_transform(proxy_addr, tk, ct,
                                                         std::chrono::milliseconds(timeout_ms));
      if (!partial) throw Error(ErrorKind::Unsatisfied, "attribute set does not satisfy the policy");
      write_object(out_path, codec::encode(*partial));
    } else if (*recover_cmd) {
      const auto pk = load<PublicKey>(pk_path);
      const auto rk = load<RetrievalKey>(rk_path);
      const auto ct = load<Ciphertext>(in_path);
      const auto partial = load<PartialDecryption>(partial_path);
      write_file(out_path, recover(pk, rk, ct, partial));
      print_verified();
    } else if (*verify_cmd) {
      const auto pk = load<PublicKey>(pk_path);
      const auto ct = load<Ciphertext>(in_path);
      const auto msg = read_file(msg_path);
      Opened opened;
      if (!sk_path.empty()) {
        opened = decrypt_opened(pk, load<SecretKey>(sk_path), ct);
      } else if (!rk_path.empty()) {
        opened = recover_opened(pk, load<RetrievalKey>(rk_path), ct, load<PartialDecryption>(partial_path));
      } else {
        throw Error(ErrorKind::Usage, "verify needs --sk or --rk with --partial");
      }
      if (!verify_m(pk, ct, msg, opened.witness)) {
        throw Error(ErrorKind::Verification, "message does not match the verification tag");
      }
      print_verified();
    } else if (*bench_cmd) {
      if (!g.seed.empty()) bench_config.seed = std::hash<std::string>{}(g.seed);
      SeededRandom key_rng(bench_config.seed);
      const KeyPair kp = setup(key_rng, curve);
      const auto records = mode == "size-sweep"
                               ? bench::size_sweep(kp.pk, bench_config, sizes)
                               : bench::reuse_sweep(kp.pk, bench_config, counts, message_bytes);
      std::ostringstream csv;
      bench::write_csv(csv, records);
      const std::string text = csv.str();
      write_file(out_path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    } else if (*tree_cmd) {
      const auto tree = bench::gen_random_tree(levels, leaves, *rng);
      std::cout << tree.text << "\n";
      std::string sep;
      for (const auto& a : tree.satisfying) {
        std::cout << sep << a;
        sep = ",";
      }
      std::cout << std::endl;
    } else if (*serve_cmd) {
      server_options.curve = curve;
      if (byzantine) server_options.byzantine_seed = byzantine_seed;
      proxy::TransformServer server(listen, server_options);
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on port " << server.port() << (byzantine ? " (byzantine)" : "")
                << std::endl;
      server.start();
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
    }
    return kOk;
  } catch (const Error& e) {
    std::cerr << "abem: " << to_string(e.kind()) << ": " << e.what() << std::endl;
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "abem: " << e.what() << std::endl;
    return kFailure;
  }
}
