#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "mucs/instance.hpp"

namespace mucs {
namespace {

constexpr std::size_t kMagicSize = 5;
constexpr std::size_t kHeaderSize = 7 * sizeof(std::uint64_t);

class Fnv1a {
 public:
  void update(const unsigned char* data, std::size_t size) {
    for (std::size_t k = 0; k < size; ++k) {
      hash_ ^= data[k];
      hash_ *= 0x100000001B3ULL;
    }
  }
  std::uint64_t digest() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t out = 0;
    for (int b = 0; b < 8; ++b) out |= ((v >> (8 * b)) & 0xFFu) << (8 * (7 - b));
    return out;
  }
}

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}

  void u64(std::uint64_t v) {
    const std::uint64_t le = to_little(v);
    write(reinterpret_cast<const unsigned char*>(&le), sizeof le);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void block(const double* data, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
      write(reinterpret_cast<const unsigned char*>(data), count * sizeof(double));
    } else {
      for (std::size_t k = 0; k < count; ++k) f64(data[k]);
    }
  }
  std::uint64_t checksum() const { return hash_.digest(); }

 private:
  void write(const unsigned char* data, std::size_t size) {
    hash_.update(data, size);
    out_.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(size));
  }

  std::ofstream& out_;
  Fnv1a hash_;
};

class Reader {
 public:
  Reader(std::ifstream& in, std::string path) : in_(in), path_(std::move(path)) {}

  std::uint64_t u64() {
    std::uint64_t le = 0;
    read(reinterpret_cast<unsigned char*>(&le), sizeof le);
    return to_little(le);
  }
  double f64() { return std::bit_cast<double>(u64()); }
  void block(double* data, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
      read(reinterpret_cast<unsigned char*>(data), count * sizeof(double));
    } else {
      for (std::size_t k = 0; k < count; ++k) data[k] = f64();
    }
  }
  std::uint64_t checksum() const { return hash_.digest(); }

 private:
  void read(unsigned char* data, std::size_t size) {
    in_.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(size));
    if (static_cast<std::size_t>(in_.gcount()) != size) {
      throw FormatError(path_ + ": truncated instance file");
    }
    hash_.update(data, size);
  }

  std::ifstream& in_;
  std::string path_;
  Fnv1a hash_;
};

bool self_consistent(const std::filesystem::path& path, std::uintmax_t file_size) {
  if (file_size < kMagicSize + sizeof(std::uint64_t)) return false;
  std::ifstream in(path, std::ios::binary);
  in.seekg(static_cast<std::streamoff>(kMagicSize));
  std::uintmax_t remaining = file_size - kMagicSize - sizeof(std::uint64_t);
  Fnv1a hash;
  std::vector<unsigned char> buf(1 << 16);
  while (remaining > 0) {
    const auto chunk = static_cast<std::size_t>(std::min<std::uintmax_t>(remaining, buf.size()));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(chunk));
    if (static_cast<std::size_t>(in.gcount()) != chunk) return false;
    hash.update(buf.data(), chunk);
    remaining -= chunk;
  }
  std::uint64_t stored_le = 0;
  in.read(reinterpret_cast<char*>(&stored_le), sizeof stored_le);
  return in.gcount() == static_cast<std::streamsize>(sizeof stored_le) &&
         to_little(stored_le) == hash.digest();
}

}  // namespace

void save_instance(const ProblemInstance& inst, const std::filesystem::path& path) {
  if (!inst.has_full_storage()) {
    throw DomainError("save_instance: instance was generated without the true and observed matrices");
  }
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(kInstanceMagic, kMagicSize);
    Writer w(out);
    w.u64(kInstanceVersion);
    w.u64(static_cast<std::uint64_t>(inst.n()));
    w.u64(static_cast<std::uint64_t>(inst.m()));
    w.f64(inst.noise.delta);
    w.f64(inst.noise.eta);
    w.f64(inst.rho);
    w.u64(inst.seed);
    const auto mn = static_cast<std::size_t>(inst.f0.size());
    w.block(inst.f0.data(), mn);
    w.block(inst.fprime.data(), mn);
    w.block(inst.s.data(), static_cast<std::size_t>(inst.s.size()));
    w.block(inst.y.data(), static_cast<std::size_t>(inst.y.size()));
    const std::uint64_t sum = to_little(w.checksum());
    out.write(reinterpret_cast<const char*>(&sum), sizeof sum);
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

ProblemInstance load_instance(const std::filesystem::path& path) {
  const std::string name = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + name);

  std::error_code ec;
  const std::uintmax_t file_size = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + name + ": " + ec.message());

  char magic[kMagicSize];
  in.read(magic, kMagicSize);
  if (in.gcount() != static_cast<std::streamsize>(kMagicSize) ||
      std::memcmp(magic, kInstanceMagic, kMagicSize) != 0) {
    throw FormatError(name + ": not an instance file (bad magic)");
  }

  Reader r(in, name);
  const std::uint64_t version = r.u64();
  if (version != kInstanceVersion) {
    throw FormatError(name + ": unsupported instance format version " + std::to_string(version));
  }
  const std::uint64_t n = r.u64();
  const std::uint64_t m = r.u64();
  ProblemInstance inst;
  inst.noise.delta = r.f64();
  inst.noise.eta = r.f64();
  inst.rho = r.f64();
  inst.seed = r.u64();

  if (n == 0 || m == 0) throw DimensionError(name + ": zero dimension in header");
  const std::uint64_t matrix_bytes = instance_matrix_bytes(static_cast<Index>(n), static_cast<Index>(m),
                                                           MatrixStorage::Full) / 3 * 2;
  const std::uintmax_t expected =
      kMagicSize + kHeaderSize + matrix_bytes + (n + m) * sizeof(double) + sizeof(std::uint64_t);
  if (file_size != expected) {
    // An intact file (trailing checksum matches its own payload) whose header
    // disagrees with its length has inconsistent dimensions; anything else is
    // truncation or corruption.
    if (!self_consistent(path, file_size)) {
      throw FormatError(name + ": truncated or corrupt instance file (size " +
                        std::to_string(file_size) + ", expected " + std::to_string(expected) + ")");
    }
    std::ostringstream msg;
    msg << name << ": header states N=" << n << ", M=" << m << " (" << expected
        << " bytes) but file has " << file_size << " bytes";
    throw DimensionError(msg.str());
  }
  try {
    inst.noise.validate();
  } catch (const DomainError& e) {
    throw FormatError(name + ": " + e.what());
  }

  const auto nn = static_cast<Index>(n);
  const auto mm = static_cast<Index>(m);
  inst.f0.resize(mm, nn);
  inst.fprime.resize(mm, nn);
  inst.s.resize(nn);
  inst.y.resize(mm);
  r.block(inst.f0.data(), static_cast<std::size_t>(n * m));
  r.block(inst.fprime.data(), static_cast<std::size_t>(n * m));
  r.block(inst.s.data(), static_cast<std::size_t>(n));
  r.block(inst.y.data(), static_cast<std::size_t>(m));
  const std::uint64_t computed = r.checksum();

  std::uint64_t stored_le = 0;
  in.read(reinterpret_cast<char*>(&stored_le), sizeof stored_le);
  if (in.gcount() != static_cast<std::streamsize>(sizeof stored_le)) {
    throw FormatError(name + ": truncated instance file (missing checksum)");
  }
  if (to_little(stored_le) != computed) throw FormatError(name + ": checksum mismatch");

  finalize_posterior_matrix(inst);
  return inst;
}

}  // namespace mucs
