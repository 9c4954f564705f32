#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "colltime/lattice.hpp"
#include "colltime/replica.hpp"

namespace colltime {

namespace {

constexpr std::uint32_t kEndianTag = 0x01020304u;
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_doubles(std::ostream& out, const double* p, std::size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

template <class T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("binary table: truncated input");
  return v;
}

void get_doubles(std::istream& in, double* p, std::size_t n) {
  if (!in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double))))
    throw std::runtime_error("binary table: truncated input");
}

void put_header(std::ostream& out, const char (&magic)[5]) {
  out.write(magic, 4);
  put(out, kEndianTag);
  put(out, kVersion);
}

void check_header(std::istream& in, const char (&magic)[5]) {
  std::array<char, 4> m{};
  if (!in.read(m.data(), 4) || std::memcmp(m.data(), magic, 4) != 0)
    throw std::runtime_error(std::string("binary table: expected magic ") + magic);
  const auto tag = get<std::uint32_t>(in);
  if (tag != kEndianTag) throw std::runtime_error("binary table: written with a different byte order");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw std::runtime_error("binary table: unsupported version " + std::to_string(version));
}

void check_size(std::int64_t N, std::int64_t radius) {
  if (N < 0 || radius < 1 || N > (std::int64_t{1} << 24) || radius > (std::int64_t{1} << 16))
    throw std::runtime_error("binary table: implausible header");
}

}  // namespace

void write_binary(std::ostream& out, const KernelTable& t) {
  put_header(out, "CLTK");
  put(out, t.horizon());
  put(out, t.radius());
  for (std::int64_t n = 0; n <= t.horizon(); ++n) {
    const auto dense = t.dense_slice(n);
    put_doubles(out, dense.data(), dense.size());
  }
  for (std::int64_t n = 0; n <= t.horizon(); ++n) put(out, t.truncation_deficit(n));
  if (!out) throw std::runtime_error("write_binary: stream error");
}

KernelTable read_kernel_binary(std::istream& in) {
  check_header(in, "CLTK");
  const auto N = get<std::int64_t>(in);
  const auto radius = get<std::int64_t>(in);
  check_size(N, radius);
  KernelTable t(N, radius);
  std::vector<double> dense(static_cast<std::size_t>(t.side() * t.side()));
  for (std::int64_t n = 0; n <= N; ++n) {
    get_doubles(in, dense.data(), dense.size());
    auto& slice = t.slices_[static_cast<std::size_t>(n)];
    for (std::size_t i = 0; i < dense.size(); ++i) {
      if ((i & 1) == static_cast<std::size_t>(n & 1))
        slice[i >> 1] = dense[i];
      else if (dense[i] != 0.0)
        throw std::runtime_error("binary table: mass on an odd-parity site");
    }
  }
  get_doubles(in, t.deficit_.data(), t.deficit_.size());
  return t;
}

void write_csv(std::ostream& out, const KernelTable& t) {
  out << "n,x1,x2,probability\n";
  char buf[64];
  for (std::int64_t n = 0; n <= t.horizon(); ++n) {
    const std::int64_t r = std::min(n, t.radius());
    for (std::int64_t a = -r; a <= r; ++a)
      for (std::int64_t b = -r; b <= r; ++b) {
        if (parity(n, {a, b}) != 0 || std::abs(a) + std::abs(b) > n) continue;
        std::snprintf(buf, sizeof buf, "%.17g", t.value(n, {a, b}));
        out << n << ',' << a << ',' << b << ',' << buf << '\n';
      }
  }
}

void write_binary(std::ostream& out, const ReplicaTable& t) {
  put_header(out, "CLTR");
  put(out, t.N_);
  put(out, t.radius_);
  put(out, t.beta_);
  put(out, t.sigma_);
  put(out, static_cast<std::int64_t>(t.has_spatial() ? 1 : 0));
  put_doubles(out, t.marginal_.data(), t.marginal_.size());
  put_doubles(out, t.deficit_.data(), t.deficit_.size());
  for (const auto& g : t.spatial_) put_doubles(out, g.data(), g.size());
  if (!out) throw std::runtime_error("write_binary: stream error");
}

ReplicaTable read_replica_binary(std::istream& in) {
  check_header(in, "CLTR");
  ReplicaTable t;
  t.N_ = get<std::int64_t>(in);
  t.radius_ = get<std::int64_t>(in);
  check_size(t.N_, t.radius_);
  t.beta_ = get<double>(in);
  t.sigma_ = get<double>(in);
  const auto spatial = get<std::int64_t>(in);
  const auto len = static_cast<std::size_t>(t.N_ + 1);
  t.marginal_.resize(len);
  t.deficit_.resize(len);
  get_doubles(in, t.marginal_.data(), len);
  get_doubles(in, t.deficit_.data(), len);
  if (spatial != 0) {
    t.spatial_.resize(len);
    for (std::size_t n = 0; n < len; ++n) {
      t.spatial_[n].resize((n + 1) * (n + 1));
      get_doubles(in, t.spatial_[n].data(), t.spatial_[n].size());
    }
  }
  return t;
}

void write_marginals_csv(std::ostream& out, const ReplicaTable& t) {
  out << "n,marginal,truncation_deficit\n";
  char buf[96];
  for (std::int64_t n = 0; n <= t.horizon(); ++n) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", t.marginal(n), t.truncation_deficit(n));
    out << n << ',' << buf << '\n';
  }
}

}  // namespace colltime
