#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "ost/volume.hpp"

using namespace ost;

namespace {

ComplexVolume random_complex(const Dims& d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  ComplexVolume v(d, {1, 1, 1}, Domain::spatial);
  for (auto& x : v.data) x = cplx(nd(rng), nd(rng));
  return v;
}

Volume random_real(const Dims& d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Volume v(d);
  for (auto& x : v.data) x = nd(rng);
  return v;
}

double rel_l2(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double e = 0, n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    e += std::norm(a[i] - b[i]);
    n += std::norm(b[i]);
  }
  return std::sqrt(e / n);
}

std::string tmp(const char* name) { return (std::filesystem::temp_directory_path() / name).string(); }

}  // namespace

TEST_CASE("impulse at the center has a flat spectrum") {
  ComplexVolume v({8, 6, 5}, {1, 1, 1}, Domain::spatial);
  v(4, 3, 2) = 1.0;
  const auto F = fft_forward(v);
  CHECK(F.domain == Domain::fourier);
  for (const auto& x : F.data) CHECK(std::abs(x - cplx(1.0, 0.0)) < 1e-14);
}

TEST_CASE("constant volume concentrates at DC") {
  ComplexVolume v({6, 5, 4}, {1, 1, 1}, Domain::spatial);
  for (auto& x : v.data) x = 2.5;
  const auto F = fft_forward(v);
  for (int z = 0; z < 4; ++z)
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 6; ++x) {
        const cplx expect = (x == 3 && y == 2 && z == 2) ? cplx(2.5 * 120, 0) : cplx(0, 0);
        CHECK(std::abs(F(x, y, z) - expect) < 1e-11);
      }
}

TEST_CASE("centered FFT matches the direct DFT and round-trips") {
  const Dims d{8, 7, 6};
  const auto v = random_complex(d, 3);
  const auto F = fft_forward(v);
  CHECK(rel_l2(F.data, oracle::direct_dft(v.data, d)) < 1e-12);
  const auto w = random_complex({16, 16, 16}, 4);
  CHECK(rel_l2(fft_inverse(fft_forward(w)).data, w.data) < 1e-12);
}

TEST_CASE("correlation with an identity kernel and with an impulse image") {
  const Dims d{10, 9, 8};
  const auto f = random_real(d, 5);
  ComplexVolume id({5, 5, 5}, {1, 1, 1}, Domain::spatial);
  id(2, 2, 2) = 1.0;
  const auto out = correlate(id, f);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(out.data[i] - f.data[i]) < 1e-12);

  const auto k = random_complex({5, 5, 5}, 6);
  Volume imp(d);
  imp(5, 4, 4) = 1.0;
  const auto r = correlate(k, imp);
  // out(x) = conj(k(c - x)) with both grids centred
  for (int z = -2; z <= 2; ++z)
    for (int y = -2; y <= 2; ++y)
      for (int x = -2; x <= 2; ++x)
        CHECK(std::abs(r(5 + x, 4 + y, 4 + z) - std::conj(k(2 - x, 2 - y, 2 - z))) < 1e-12);
}

TEST_CASE("correlation matches brute force and is shift covariant") {
  const Dims d{16, 16, 16};
  const auto f = random_real(d, 7);
  const auto k = random_complex({7, 7, 7}, 8);
  const auto out = correlate(k, f);
  CHECK(rel_l2(out.data, oracle::brute_correlate(k.data, k.dims, f.data, d)) < 1e-10);

  Volume g(d);
  for (int z = 0; z < 16; ++z)
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) g((x + 3) % 16, (y + 1) % 16, z) = f(x, y, z);
  const auto og = correlate(k, g);
  double worst = 0.0;
  for (int z = 0; z < 16; ++z)
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) worst = std::max(worst, std::abs(og((x + 3) % 16, (y + 1) % 16, z) - out(x, y, z)));
  CHECK(worst < 1e-10);
}

TEST_CASE("Correlator reuses the image spectrum") {
  const auto f = random_real({12, 10, 8}, 9);
  const auto k = random_complex({5, 3, 3}, 10);
  const Correlator c(f);
  CHECK(rel_l2(c.apply(k).data, correlate(k, f).data) < 1e-14);
}

TEST_CASE("volume files round-trip bytes and spacing") {
  Volume v({5, 4, 3}, {0.1, 0.7, 1.0 / 3.0});
  for (std::size_t i = 0; i < v.size(); ++i) v.data[i] = static_cast<float>(0.25 * i - 3.0);
  const auto p = tmp("ost_test_vol.f32");
  write_volume(v, p);
  const auto w = read_volume(p);
  CHECK(w.dims == v.dims);
  CHECK(w.spacing == v.spacing);
  CHECK(w.data == v.data);
  write_volume(w, p + "2");
  std::ifstream a(p, std::ios::binary), b(p + "2", std::ios::binary);
  CHECK(std::string(std::istreambuf_iterator<char>(a), {}) == std::string(std::istreambuf_iterator<char>(b), {}));
}

TEST_CASE("volume payload size mismatch is a format error") {
  Volume v({5, 4, 3});
  const auto p = tmp("ost_test_short.f32");
  write_volume(v, p);
  std::filesystem::resize_file(p, 4 * 59);
  CHECK_THROWS_AS(read_volume(p), FormatError);
  std::filesystem::resize_file(p, 4 * 61);
  CHECK_THROWS_AS(read_volume(p), FormatError);
  std::ofstream(p + ".json") << R"({"dims":[5,4,3],"spacing":[1,1,1],"dtype":"f64"})";
  CHECK_THROWS_AS(read_volume(p), FormatError);
}

TEST_CASE("complex volume files round-trip") {
  auto v = random_complex({4, 3, 2}, 11);
  for (auto& x : v.data) x = cplx(static_cast<float>(x.real()), static_cast<float>(x.imag()));
  const auto p = tmp("ost_test_c.c64");
  write_complex_volume(v, p);
  CHECK(read_complex_volume(p).data == v.data);
}

TEST_CASE("replicate padding and crop") {
  const auto f = random_real({6, 5, 4}, 12);
  const auto p = pad_replicate(f, {2, 1, 3});
  CHECK(p.dims == Dims{10, 7, 10});
  CHECK(p(0, 0, 0) == f(0, 0, 0));
  CHECK(p(9, 6, 9) == f(5, 4, 3));
  CHECK(crop(p, {2, 1, 3}, f.dims).data == f.data);
  CHECK_THROWS_AS(crop(p, {5, 0, 0}, f.dims), DimensionError);
}

TEST_CASE("Gaussian blur preserves constants and trilinear sampling interpolates") {
  Volume c({9, 9, 9});
  for (auto& x : c.data) x = 4.0;
  for (double x : gaussian_blur(c, 1.5).data) CHECK(x == doctest::Approx(4.0).epsilon(1e-12));
  Volume r({4, 4, 4});
  for (int z = 0; z < 4; ++z)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) r(x, y, z) = x + 2.0 * y - z;
  CHECK(sample_trilinear(r.data.data(), r.dims, {1.25, 2.5, 0.75}) == doctest::Approx(1.25 + 5.0 - 0.75));
}

TEST_CASE("invalid dims are rejected") {
  CHECK_THROWS_AS(Volume({0, 4, 4}), ParameterError);
  CHECK_THROWS_AS(Volume({4, 4, 4}, {1.0, -1.0, 1.0}), ParameterError);
}
