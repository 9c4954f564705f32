#include "colltime/runner/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

namespace colltime::runner {

std::string tool_version() { return COLLTIME_VERSION; }

namespace {

std::string hex(const unsigned char* p, unsigned n) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(2 * n, '0');
  for (unsigned i = 0; i < n; ++i) {
    s[2 * i] = digits[p[i] >> 4];
    s[2 * i + 1] = digits[p[i] & 15];
  }
  return s;
}

struct Sha256 {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};
  Sha256() {
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
      throw std::runtime_error("sha256: cannot initialise digest");
  }
  void update(const void* p, std::size_t n) {
    if (EVP_DigestUpdate(ctx.get(), p, n) != 1) throw std::runtime_error("sha256: update failed");
  }
  std::string finish() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) throw std::runtime_error("sha256: final failed");
    return hex(md, len);
  }
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.finish();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError("manifest: cannot read " + path.string());
  Sha256 h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h.update(buf, static_cast<std::size_t>(in.gcount()));
  }
  return h.finish();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = tool;
  j["version"] = version;
  j["kind"] = kind;
  j["seed"] = seed;
  j["h"] = h;
  j["betas"] = betas;
  j["config"] = config;
  j["workers"] = workers;
  j["strict_truncation"] = strict_truncation;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["runtime_seconds"] = runtime_seconds;
  j["status"] = status;
  auto& files_j = j["files"] = nlohmann::ordered_json::array();
  for (const auto& f : files)
    files_j.push_back({{"path", f.path}, {"role", f.role}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    m.tool = j.at("tool").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.kind = j.at("kind").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.h = j.at("h").get<int>();
    m.betas = j.at("betas").get<std::vector<double>>();
    m.config = j.at("config").get<std::string>();
    m.workers = j.value("workers", 1u);
    m.strict_truncation = j.value("strict_truncation", false);
    m.started_at = j.value("started_at", "");
    m.finished_at = j.value("finished_at", "");
    m.runtime_seconds = j.value("runtime_seconds", 0.0);
    m.status = j.value("status", "");
    for (const auto& f : j.at("files"))
      m.files.push_back({f.at("path").get<std::string>(), f.at("role").get<std::string>(),
                         f.at("sha256").get<std::string>(), f.at("bytes").get<std::uint64_t>()});
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("manifest: malformed (") + e.what() + ")");
  }
  return m;
}

const FileRecord* RunManifest::find_role(std::string_view role) const {
  for (const auto& f : files)
    if (f.role == role) return &f;
  return nullptr;
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IntegrityError("manifest: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError("manifest: " + path.string() + " is not valid JSON");
  }
  return RunManifest::from_json(j);
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("manifest: cannot write " + path.string());
  out << manifest.to_json().dump(2) << '\n';
}

void verify_files(const RunManifest& manifest, const std::filesystem::path& run_dir) {
  for (const auto& f : manifest.files) {
    const auto p = run_dir / f.path;
    if (!std::filesystem::exists(p)) throw IntegrityError("manifest: listed file is missing: " + p.string());
    const auto digest = sha256_file(p);
    if (digest != f.sha256)
      throw IntegrityError("manifest: hash mismatch for " + p.string() + " (recorded " + f.sha256 + ", found " +
                           digest + ")");
  }
}

}  // namespace colltime::runner
