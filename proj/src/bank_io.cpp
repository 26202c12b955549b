#include "ost/io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <iterator>

namespace ost {

static_assert(std::endian::native == std::endian::little, "payloads are written in host order");

namespace {

std::string base_name(const std::string& p) {
  const auto k = p.find_last_of('/');
  return k == std::string::npos ? p : p.substr(k + 1);
}

template <class T>
void put(std::ofstream& os, const std::vector<T>& v) {
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(sizeof(T) * v.size()));
}

template <class T>
void get(std::ifstream& is, std::vector<T>& v, const std::string& what) {
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(sizeof(T) * v.size()));
  if (static_cast<std::size_t>(is.gcount()) != sizeof(T) * v.size()) throw FormatError("truncated payload: " + what);
}

Dims dims_of(const nlohmann::json& j) { return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>()}; }
Vec3 vec_of(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

void expect_end(std::ifstream& is, const std::string& what) {
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("payload size mismatch: " + what);
}

}  // namespace

nlohmann::json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path);
  try {
    nlohmann::json j;
    is >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("invalid JSON in " + path + ": " + e.what());
  }
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot write " + path);
  os << j.dump(2) << '\n';
}

std::string file_hash(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return "";
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (is) {
    is.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < is.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

nlohmann::json design_to_json(const SphericalDesign& d) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : d.points) pts.push_back({p[0], p[1], p[2]});
  return {{"points", pts}, {"weights", d.weights}};
}

SphericalDesign design_from_json(const nlohmann::json& j) {
  try {
    SphericalDesign d;
    for (const auto& p : j.at("points")) d.points.push_back(vec_of(p));
    d.weights = j.at("weights").get<std::vector<double>>();
    d.validate();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad design: ") + e.what());
  }
}

void write_design(const SphericalDesign& d, const std::string& path) { write_json(design_to_json(d), path); }
SphericalDesign read_design(const std::string& path) { return design_from_json(read_json(path)); }

void write_bank(const WaveletBank& bank, const std::string& path) {
  nlohmann::json j = {{"format", "ost-bank"},
                      {"version", 1},
                      {"design_kind", bank.kind},
                      {"params", bank.params},
                      {"design", design_to_json(bank.design)},
                      {"coeffs", bank.coeffs.values},
                      {"s_rho", bank.s_rho},
                      {"spacing", bank.spacing},
                      {"filter_dims", bank.filter_dims},
                      {"orientations", bank.filters.size()},
                      {"hash", bank.hash()},
                      {"payload", base_name(path) + ".bin"},
                      {"payload_dtype", "c128"},
                      {"phi0_dtype", "f64"}};
  write_json(j, path);
  std::ofstream os(path + ".bin", std::ios::binary);
  if (!os) throw FormatError("cannot write " + path + ".bin");
  for (const auto& f : bank.filters) put(os, f.data);
  put(os, bank.phi0.data);
}

WaveletBank read_bank(const std::string& path) {
  const auto j = read_json(path);
  WaveletBank b;
  std::string want;
  try {
    if (j.at("format").get<std::string>() != "ost-bank") throw FormatError("not a bank manifest: " + path);
    if (j.at("payload_dtype").get<std::string>() != "c128") throw FormatError("unknown bank payload dtype");
    b.kind = j.at("design_kind").get<std::string>();
    b.params = j.at("params");
    b.design = design_from_json(j.at("design"));
    b.coeffs.values = j.at("coeffs").get<std::vector<double>>();
    b.s_rho = j.at("s_rho").get<double>();
    b.spacing = vec_of(j.at("spacing"));
    b.filter_dims = dims_of(j.at("filter_dims"));
    want = j.at("hash").get<std::string>();
    if (j.at("orientations").get<std::size_t>() != b.design.size())
      throw FormatError("orientation count differs from design");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad bank manifest: ") + e.what());
  }
  const auto dir = path.find_last_of('/') == std::string::npos ? std::string() : path.substr(0, path.find_last_of('/') + 1);
  std::ifstream is(dir + j.at("payload").get<std::string>(), std::ios::binary);
  if (!is) throw FormatError("cannot open bank payload for " + path);
  b.filters.assign(b.design.size(), ComplexVolume(b.filter_dims, b.spacing, Domain::spatial));
  for (auto& f : b.filters) get(is, f.data, path);
  b.phi0 = Volume(b.filter_dims, b.spacing);
  get(is, b.phi0.data, path);
  expect_end(is, path);
  if (b.hash() != want) throw ProvenanceError("bank payload hash mismatch for " + path);
  return b;
}

void write_score(const OrientationScore& U, const std::string& path) {
  nlohmann::json j = {{"format", "ost-score"},
                      {"version", 1},
                      {"dims", U.dims},
                      {"spacing", U.spacing},
                      {"design", design_to_json(U.design)},
                      {"bank_hash", U.bank_hash},
                      {"s_rho", U.s_rho},
                      {"layout", "orientation-major"},
                      {"payload", base_name(path) + ".bin"},
                      {"dtype", "c64"},
                      {"low_dtype", "f32"}};
  write_json(j, path);
  std::ofstream os(path + ".bin", std::ios::binary);
  if (!os) throw FormatError("cannot write " + path + ".bin");
  std::vector<std::complex<float>> buf;
  for (const auto& ch : U.channels) {
    buf.assign(ch.begin(), ch.end());
    put(os, buf);
  }
  std::vector<float> low(U.low.data.begin(), U.low.data.end());
  put(os, low);
}

OrientationScore read_score(const std::string& path) {
  const auto j = read_json(path);
  OrientationScore U;
  try {
    if (j.at("format").get<std::string>() != "ost-score") throw FormatError("not a score manifest: " + path);
    if (j.at("dtype").get<std::string>() != "c64" || j.at("low_dtype").get<std::string>() != "f32")
      throw FormatError("unknown score dtype");
    U.dims = dims_of(j.at("dims"));
    U.spacing = vec_of(j.at("spacing"));
    U.design = design_from_json(j.at("design"));
    U.bank_hash = j.at("bank_hash").get<std::string>();
    U.s_rho = j.at("s_rho").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad score manifest: ") + e.what());
  }
  for (int a = 0; a < 3; ++a)
    if (U.dims[a] < 1) throw FormatError("bad score dims");
  const auto dir = path.find_last_of('/') == std::string::npos ? std::string() : path.substr(0, path.find_last_of('/') + 1);
  std::ifstream is(dir + j.at("payload").get<std::string>(), std::ios::binary);
  if (!is) throw FormatError("cannot open score payload for " + path);
  const std::size_t nv = voxel_count(U.dims);
  std::vector<std::complex<float>> buf(nv);
  U.channels.resize(U.design.size());
  for (auto& ch : U.channels) {
    get(is, buf, path);
    ch.assign(buf.begin(), buf.end());
  }
  std::vector<float> low(nv);
  get(is, low, path);
  expect_end(is, path);
  U.low = Volume(U.dims, U.spacing);
  U.low.data.assign(low.begin(), low.end());
  return U;
}

}  // namespace ost
