#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "mucs/instance.hpp"

using namespace mucs;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mucs_unit";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<unsigned char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::uint64_t fnv1a(const unsigned char* data, std::size_t size) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t k = 0; k < size; ++k) {
    h ^= data[k];
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

TEST_SUITE("instance") {

TEST_CASE("zero signal and zero noise give zero measurements") {
  const auto inst = generate(4, 0.5, SignalPrior(0.0), NoiseModel{0.0, 0.0}, 1);
  CHECK(inst.m() == 2);
  CHECK(inst.y.isZero(0.0));
}

TEST_CASE("eta = 0 keeps every matrix identical") {
  const auto inst = generate(50, 0.4, SignalPrior(0.2), NoiseModel{1e-3, 0.0}, 9);
  CHECK(inst.fprime == inst.f0);
  CHECK(inst.f == inst.f0);
}

TEST_CASE("posterior matrix is the observed one rescaled") {
  const double eta = 0.37;
  const auto inst = generate(60, 0.5, SignalPrior(0.2), NoiseModel{0.0, eta}, 4);
  const RowMatrix expect = inst.fprime * (1.0 / std::sqrt(1.0 + eta));
  CHECK(inst.f == expect);
  CHECK(inst.entry_posterior_variance() == doctest::Approx(eta / (1 + eta) / 60));
  const Vector col = inst.f.colwise().squaredNorm().transpose();
  CHECK(col == inst.col_sq);
}

TEST_CASE("generation is deterministic and storage-independent") {
  const auto a = generate(200, 0.5, SignalPrior(0.1), NoiseModel{1e-4, 1e-2}, 77);
  const auto b = generate(200, 0.5, SignalPrior(0.1), NoiseModel{1e-4, 1e-2}, 77);
  CHECK(a.f0 == b.f0);
  CHECK(a.f == b.f);
  CHECK(a.y == b.y);
  CHECK(a.s == b.s);
  GenerateOptions lean;
  lean.storage = MatrixStorage::SolverOnly;
  const auto c = generate(200, 0.5, SignalPrior(0.1), NoiseModel{1e-4, 1e-2}, 77, lean);
  CHECK_FALSE(c.has_full_storage());
  CHECK(c.f == a.f);
  CHECK(c.y == a.y);
  const auto d = generate(200, 0.5, SignalPrior(0.1), NoiseModel{1e-4, 1e-2}, 78);
  CHECK(d.f0 != a.f0);
}

TEST_CASE("measurements equal F0 s + xi") {
  const auto inst = generate(300, 0.6, SignalPrior(0.3), NoiseModel{1e-2, 0.5}, 21);
  const Vector xi = measurement_noise(inst.m(), 1e-2, 21);
  const Vector recomputed = inst.f0 * inst.s + xi;
  CHECK((recomputed - inst.y).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("entry variance of F0 over 50 seeds") {
  const Index n = 1000;
  double sum = 0, sum2 = 0;
  double count = 0;
  double worst_column_z = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto inst = generate(n, 0.5, SignalPrior(0.1), NoiseModel{0.0, 0.1}, seed);
    sum += inst.f0.sum();
    sum2 += inst.f0.squaredNorm();
    count += static_cast<double>(inst.f0.size());
    if (seed == 1) {
      // Column second moments: mean of M squares of N(0, 1/N) draws.
      const double m = static_cast<double>(inst.m());
      const double se = std::sqrt(2.0 / m) / static_cast<double>(n);
      for (Index i = 0; i < n; ++i) {
        const double moment = inst.f0.col(i).squaredNorm() / m;
        worst_column_z = std::max(worst_column_z, std::fabs(moment - 1.0 / n) / se);
      }
    }
  }
  const double mean = sum / count;
  const double var = sum2 / count - mean * mean;
  const double se = std::sqrt(2.0 / count) / n;
  CHECK(std::fabs(var - 1.0 / n) < 3 * se);
  CHECK(worst_column_z < 5.0);
}

TEST_CASE("mismatch between F and F0 acts as extra noise rho D") {
  const double delta = 1e-10, eta = 1e-4;
  GenerateOptions lean;
  lean.storage = MatrixStorage::SolverOnly;
  double total = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto inst = generate(10000, 0.5, SignalPrior(0.1), NoiseModel{delta, eta}, seed, lean);
    total += (inst.y - inst.f * inst.s).squaredNorm() / static_cast<double>(inst.m());
  }
  const double expected = delta + 0.1 * eta / (1 + eta);
  CHECK(std::fabs(total / 3 - expected) < 0.1 * expected);
}

TEST_CASE("round trip is bit exact") {
  const auto inst = generate(37, 0.6, SignalPrior(0.25), NoiseModel{1e-3, 0.2}, 1234567890123ULL);
  const auto path = scratch("roundtrip.bin");
  save_instance(inst, path);
  const auto back = load_instance(path);
  CHECK(back.f0 == inst.f0);
  CHECK(back.fprime == inst.fprime);
  CHECK(back.f == inst.f);
  CHECK(back.s == inst.s);
  CHECK(back.y == inst.y);
  CHECK(back.col_sq == inst.col_sq);
  CHECK(back.noise.delta == inst.noise.delta);
  CHECK(back.noise.eta == inst.noise.eta);
  CHECK(back.rho == inst.rho);
  CHECK(back.seed == inst.seed);
  const auto bytes = slurp(path);
  CHECK(std::memcmp(bytes.data(), "AMPU1", 5) == 0);
  CHECK(bytes.size() == 5 + 7 * 8 + (2 * 37 * 22 + 37 + 22) * 8 + 8);
}

TEST_CASE("corrupt files are rejected") {
  const auto inst = generate(20, 0.5, SignalPrior(0.3), NoiseModel{0.0, 0.1}, 3);
  const auto path = scratch("corrupt.bin");
  save_instance(inst, path);
  const auto good = slurp(path);

  auto truncated = good;
  truncated.resize(good.size() - 100);
  spit(path, truncated);
  CHECK_THROWS_AS(load_instance(path), FormatError);

  auto flipped = good;
  flipped[200] ^= 0x10;
  spit(path, flipped);
  CHECK_THROWS_AS(load_instance(path), FormatError);

  auto bad_magic = good;
  bad_magic[0] = 'X';
  spit(path, bad_magic);
  CHECK_THROWS_AS(load_instance(path), FormatError);

  auto bad_version = good;
  bad_version[5] = 9;
  spit(path, bad_version);
  CHECK_THROWS_AS(load_instance(path), FormatError);

  // Header claims N = 21 but the payload (and its checksum) is for N = 20.
  auto resized = good;
  resized[5 + 8] = 21;
  const std::uint64_t sum = fnv1a(resized.data() + 5, resized.size() - 5 - 8);
  std::memcpy(resized.data() + resized.size() - 8, &sum, 8);
  spit(path, resized);
  CHECK_THROWS_AS(load_instance(path), DimensionError);

  CHECK_THROWS_AS(load_instance(scratch("missing.bin")), IoError);
}

TEST_CASE("budget and argument checks happen before allocation") {
  GenerateOptions small;
  small.memory_budget_bytes = 1000;
  CHECK_THROWS_AS(generate(100, 0.5, SignalPrior(0.1), NoiseModel{}, 1, small), DimensionError);
  CHECK(instance_matrix_bytes(100, 50, MatrixStorage::Full) == 3 * 8 * 5000);
  CHECK(instance_matrix_bytes(100, 50, MatrixStorage::SolverOnly) == 8 * 5000);
  CHECK_THROWS_AS(instance_matrix_bytes(Index(1) << 40, Index(1) << 40, MatrixStorage::Full), DimensionError);
  CHECK_THROWS_AS(generate(0, 0.5, SignalPrior(0.1), NoiseModel{}, 1), DomainError);
  CHECK_THROWS_AS(generate(10, 0.01, SignalPrior(0.1), NoiseModel{}, 1), DomainError);
  CHECK_THROWS_AS(generate(10, 0.5, SignalPrior(0.1), NoiseModel{-1.0, 0.0}, 1), DomainError);
  CHECK(measurement_count(10, 0.25) == 3);
  GenerateOptions lean;
  lean.storage = MatrixStorage::SolverOnly;
  const auto inst = generate(10, 0.5, SignalPrior(0.1), NoiseModel{}, 1, lean);
  CHECK_THROWS_AS(save_instance(inst, scratch("lean.bin")), DomainError);
}

}
