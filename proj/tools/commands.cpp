#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ost/cedos.hpp"
#include "ost/experiments.hpp"
#include "ost/io.hpp"
#include "ost/phantoms.hpp"
#include "ost/score.hpp"
#include "ost/tubularity.hpp"
#include "ost/wavelet_dft.hpp"
#include "ost/zernike.hpp"

namespace ost::cli {

namespace {

Dims cube(int n) { return {n, n, n}; }

Dims half_filter(const WaveletBank& b) { return {b.filter_dims[0] / 2, b.filter_dims[1] / 2, b.filter_dims[2] / 2}; }

OrientationScore crop_score(const OrientationScore& U, const Dims& off, const Dims& dims) {
  OrientationScore out = U;
  out.dims = dims;
  out.low = crop(U.low, off, dims);
  for (std::size_t i = 0; i < U.channels.size(); ++i) {
    auto& ch = out.channels[i];
    ch.assign(voxel_count(dims), cplx(0, 0));
    std::size_t k = 0;
    for (int z = 0; z < dims[2]; ++z)
      for (int y = 0; y < dims[1]; ++y)
        for (int x = 0; x < dims[0]; ++x, ++k)
          ch[k] = U.channels[i][(x + off[0]) + static_cast<std::size_t>(U.dims[0]) *
                                                   ((y + off[1]) + static_cast<std::size_t>(U.dims[1]) * (z + off[2]))];
  }
  return out;
}

// Transform with edge-replicated padding by half the filter size, cropped back.
OrientationScore padded_forward(const Volume& f, const WaveletBank& bank, bool pad) {
  if (!pad) return forward(f, bank);
  const Dims p = half_filter(bank);
  return crop_score(forward(pad_replicate(f, p), bank), p, f.dims);
}

std::vector<double> parse_times(const std::string& s) {
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    double a = 0, b = 0, h = 1;
    char c1 = 0, c2 = 0;
    std::istringstream is(s);
    is >> a >> c1 >> b;
    if (is >> c2) is >> h;
    if (!is.eof() && is.fail()) throw ParameterError("bad time range " + s);
    if (!(h > 0.0) || b < a) throw ParameterError("bad time range " + s);
    const int n = static_cast<int>(std::floor((b - a) / h + 1e-9));
    for (int k = 0; k <= n; ++k) out.push_back(a + k * h);
    return out;
  }
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ParameterError("bad time value " + tok);
    }
  }
  if (out.empty()) throw ParameterError("empty time list");
  return out;
}

std::pair<double, double> parse_range(const std::string& s) {
  const auto k = s.find(':');
  try {
    if (k == std::string::npos) {
      const double v = std::stod(s);
      return {v, v};
    }
    return {std::stod(s.substr(0, k)), std::stod(s.substr(k + 1))};
  } catch (const std::exception&) {
    throw ParameterError("bad range " + s);
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot write " + path);
  os << text;
}

// Central z-slice of every filter, real and imaginary parts.
std::string slice_csv(const WaveletBank& b) {
  std::ostringstream os;
  os.precision(9);
  os << "orientation,x,y,re,im\n";
  const int z = b.filter_dims[2] / 2;
  for (std::size_t i = 0; i < b.filters.size(); ++i)
    for (int y = 0; y < b.filter_dims[1]; ++y)
      for (int x = 0; x < b.filter_dims[0]; ++x) {
        const cplx v = b.filters[i](x, y, z);
        os << i << ',' << x << ',' << y << ',' << v.real() << ',' << v.imag() << '\n';
      }
  return os.str();
}

void add_design(CLI::App& app, Action& out, std::string& name) {
  auto* c = app.add_subcommand("design", "build a wavelet bank");
  struct O {
    std::string kind = "dft", output, design_in, design_out;
    int no = 42, dims = 11, pmax = 24;
    double gamma = 0.85, so = 0.10125, srho = 128.0, alpha = 3.0, tol = 1e-3, sigma_erf = 0.0;
    std::uint64_t seed = 0;
  };
  auto o = std::make_shared<O>();
  c->add_option("--kind", o->kind)->check(CLI::IsMember({"dft", "zernike"}));
  c->add_option("--no", o->no, "orientation count");
  c->add_option("--gamma", o->gamma);
  c->add_option("--so", o->so, "angular diffusion time s_o");
  c->add_option("--srho", o->srho, "low-pass scale s_rho");
  c->add_option("--sigma-erf", o->sigma_erf, "radial fall-off (<= 0: automatic)");
  c->add_option("--dims", o->dims, "filter grid edge");
  c->add_option("--alpha", o->alpha, "Zernike alpha");
  c->add_option("--pmax", o->pmax, "Zernike radial order");
  c->add_option("--tol", o->tol);
  c->add_option("--seed", o->seed);
  c->add_option("--design-in", o->design_in, "load orientations from JSON");
  c->add_option("--design-out", o->design_out, "save orientations as JSON");
  c->add_option("-o,--output", o->output)->required();
  c->callback([&out, &name, o] {
    name = "design";
    out = [o](Run& r) {
      SphericalDesign design;
      if (!o->design_in.empty()) {
        design = read_design(o->design_in);
        r.input(o->design_in);
      } else {
        design = sample_sphere(o->no, o->seed);
      }
      WaveletBank bank;
      if (o->kind == "dft") {
        CakeParams p;
        p.n_o = static_cast<int>(design.size());
        p.gamma = o->gamma;
        p.s_o = o->so;
        p.s_rho = o->srho;
        p.sigma_erf = o->sigma_erf;
        p.filter_dims = cube(o->dims);
        p.tol = o->tol;
        p.seed = o->seed;
        bank = build_bank(p, design);
        r.params = p.to_json();
      } else {
        ZernikeParams p;
        p.n_o = static_cast<int>(design.size());
        p.alpha = o->alpha;
        p.s_o = o->so;
        p.p_max = o->pmax;
        p.tol = o->tol;
        p.s_rho = o->srho;
        p.filter_dims = cube(o->dims);
        p.seed = o->seed;
        bank = build_zernike_bank(p, design);
        r.params = p.to_json();
      }
      r.params["kind"] = o->kind;
      write_bank(bank, o->output);
      r.output(o->output);
      r.output(o->output + ".bin");
      if (!o->design_out.empty()) {
        write_design(design, o->design_out);
        r.output(o->design_out);
      }
      r.results = {{"hash", bank.hash()}, {"orientations", design.size()}, {"band_limit", bank.coeffs.band_limit()}};
    };
  });
}

void add_transform(CLI::App& app, Action& out, std::string& name) {
  auto* c = app.add_subcommand("transform", "orientation score of a volume");
  struct O {
    std::string input, bank, output;
    bool no_pad = false;
  };
  auto o = std::make_shared<O>();
  c->add_option("-i,--input", o->input)->required();
  c->add_option("-b,--bank", o->bank)->required();
  c->add_option("-o,--output", o->output)->required();
  c->add_flag("--no-pad", o->no_pad, "periodic boundary instead of edge-replicated padding");
  c->callback([&out, &name, o] {
    name = "transform";
    out = [o](Run& r) {
      const auto f = read_volume(o->input);
      const auto bank = read_bank(o->bank);
      r.input(o->input);
      r.input(o->bank);
      r.params = {{"pad", !o->no_pad}, {"bank_hash", bank.hash()}};
      const auto U = padded_forward(f, bank, !o->no_pad);
      write_score(U, o->output);
      r.output(o->output);
      r.output(o->output + ".bin");
      r.results = {{"dims", U.dims}, {"orientations", U.orientations()}};
    };
  });
}

void add_reconstruct(CLI::App& app, Action& out, std::string& name) {
  auto* c = app.add_subcommand("reconstruct", "volume from an orientation score");
  struct O {
    std::string input, bank, output, mode = "exact";
    double eps = 1e-3;
  };
  auto o = std::make_shared<O>();
  c->add_option("-i,--input", o->input)->required();
  c->add_option("-b,--bank", o->bank, "required for exact mode");
  c->add_option("--mode", o->mode)->check(CLI::IsMember({"exact", "sum"}));
  c->add_option("--eps", o->eps, "floor on M in exact mode");
  c->add_option("-o,--output", o->output)->required();
  c->callback([&out, &name, o] {
    name = "reconstruct";
    out = [o](Run& r) {
      const auto U = read_score(o->input);
      r.input(o->input);
      r.params = {{"mode", o->mode}, {"eps", o->eps}};
      Volume f;
      if (o->mode == "exact") {
        if (o->bank.empty()) throw ParameterError("exact mode needs --bank");
        const auto bank = read_bank(o->bank);
        r.input(o->bank);
        if (bank.hash() != U.bank_hash) throw ProvenanceError("score was not produced by this bank");
        f = reconstruct_exact(U, bank, o->eps);
      } else {
        f = reconstruct_sum(U);
      }
      write_volume(f, o->output);
      r.output(o->output);
    };
  });
}

void add_stability(CLI::App& app, Action& out, std::string& name) {
  auto* c = app.add_subcommand("stability", "M and N bounds of a bank");
  struct O {
    std::string bank, output;
    int grid = 64;
  };
  auto o = std::make_shared<O>();
  c->add_option("-b,--bank", o->bank)->required();
  c->add_option("--grid", o->grid, "frequency grid edge");
  c->add_option("-o,--output", o->output);
  c->callback([&out, &name, o] {
    name = "stability";
    out = [o](Run& r) {
      const auto bank = read_bank(o->bank);
      r.input(o->bank);
      r.params = {{"grid", o->grid}};
      const auto a = condition_audit(bank, cube(o->grid));
      r.results = a.to_json();
      if (!o->output.empty()) {
        write_json(r.results, o->output);
        r.output(o->output);
      }
    };
  });
}

void add_diffusion_options(CLI::App* c, DiffusionConfig& cfg) {
  c->add_option("-T,--time", cfg.T, "stopping time");
  c->add_option("--dt", cfg.dt);
  c->add_option("--d44", cfg.d44, "angular diffusion");
  c->add_option("--quantile", cfg.quantile, "conductivity quantile");
  c->add_option("--sigma-s", cfg.sigma_s, "derivative regularization, voxels");
  c->add_option("--cond-floor", cfg.cond_floor);
  c->add_option("--knn", cfg.knn, "angular neighbours");
}

void add_cedos(CLI::App& app, Action& out, std::string& name) {
  auto* c = app.add_subcommand("cedos", "crossing-preserving diffusion");
  struct O {
    std::string input, bank, output;
    DiffusionConfig cfg;
    bool no_pad = false;
  };
  auto o = std::make_shared<O>();
  c->add_option("-i,--input", o->input)->required();
  c->add_option("-b,--bank", o->bank)->required();
  c->add_option("-o,--output", o->output)->required();
  c->add_flag("--no-pad", o->no_pad);
  add_diffusion_options(c, o->cfg);
  c->callback([&out, &name, o] {
    name = "cedos";
    out = [o](Run& r) {
      o->cfg.validate();
      const auto f = read_volume(o->input);
      const auto bank = read_bank(o->bank);
      r.input(o->input);
      r.input(o->bank);
      r.params = o->cfg.to_json();
      r.params["pad"] = !o->no_pad;
      DiffusionReport rep;
      Volume g;
      if (o->no_pad) {
        g = process_image(f, bank, o->cfg, &rep);
      } else {
        const Dims p = half_filter(bank);
        g = crop(process_image(pad_replicate(f, p), bank, o->cfg, &rep), p, f.dims);
      }
      write_volume(g, o->output);
      r.output(o->output);
      r.results = rep.to_json();
    };
  });
}

void write_nstar(const TubularityField& tf, const std::string& path) {
  std::vector<float> v;
  v.reserve(3 * tf.nstar.size());
  for (const auto& n : tf.nstar)
    for (int a = 0; a < 3; ++a) v.push_back(static_cast<float>(n[a]));
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write " + path);
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(float)));
  nlohmann::json h = {{"dims", tf.dims}, {"spacing", {1.0, 1.0, 1.0}}, {"dtype", "f32"}, {"order", "x-fastest"},
                      {"channels", 3}, {"layout", "interleaved"}};
  write_text(path + ".json", h.dump() + "\n");
}

void add_tubularity(CLI::App& app, Action& out, std::string& name) {
  auto* c = app.add_subcommand("tubularity", "tubularity, radius and axis from a score");
  struct O {
    std::string input, output;
    TubularityConfig cfg;
    int L = 5;
    double top = 0.01;
  };
  auto o = std::make_shared<O>();
  c->add_option("-i,--input", o->input)->required();
  c->add_option("-o,--output", o->output, "output directory")->required();
  c->add_option("--sigma-o", o->cfg.sigma_o);
  c->add_option("--sigma-r", o->cfg.sigma_r);
  c->add_option("--theta", o->cfg.theta);
  c->add_option("--rmin", o->cfg.rmin);
  c->add_option("--rmax", o->cfg.rmax);
  c->add_option("--rstep", o->cfg.rstep);
  c->add_option("--sh-order", o->L, "spherical-harmonic order for steering");
  c->add_option("--top", o->top, "fraction of voxels listed as centerline candidates");
  c->callback([&out, &name, o] {
    name = "tubularity";
    out = [o](Run& r) {
      o->cfg.validate();
      if (o->L < 1) throw ParameterError("sh-order must be >= 1");
      const auto U = read_score(o->input);
      r.input(o->input);
      r.params = o->cfg.to_json();
      r.params["sh_order"] = o->L;
      r.params["top"] = o->top;
      const auto e = sh_expand(U, o->L);
      const auto tf = tubularity(e, U.design.points, o->cfg);
      namespace fs = std::filesystem;
      fs::create_directories(o->output);
      const auto path = [&](const char* f) { return (fs::path(o->output) / f).string(); };
      Volume st(tf.dims, U.spacing), rs(tf.dims, U.spacing);
      st.data = tf.st;
      rs.data = tf.rstar;
      write_volume(st, path("st.f32"));
      write_volume(rs, path("rstar.f32"));
      write_nstar(tf, path("nstar.f32"));
      const auto seg = segment(tf, o->top);
      // candidates: the voxels with s^t among the top fraction, the segmentation centers
      std::vector<double> pos;
      for (double x : tf.st)
        if (x > 0.0) pos.push_back(x);
      std::sort(pos.begin(), pos.end(), std::greater<double>());
      const std::size_t keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(o->top * tf.st.size())));
      const double thr = pos.empty() ? 1.0 : pos[std::min(keep, pos.size()) - 1];
      std::ostringstream csv;
      csv.precision(9);
      csv << "x,y,z,st,r,nx,ny,nz\n";
      for (int z = 0; z < tf.dims[2]; ++z)
        for (int y = 0; y < tf.dims[1]; ++y)
          for (int x = 0; x < tf.dims[0]; ++x) {
            const std::size_t v = x + static_cast<std::size_t>(tf.dims[0]) * (y + static_cast<std::size_t>(tf.dims[1]) * z);
            if (pos.empty() || !(tf.st[v] > 0.0 && tf.st[v] >= thr)) continue;
            const auto& n = tf.nstar[v];
            csv << x << ',' << y << ',' << z << ',' << tf.st[v] << ',' << tf.rstar[v] << ',' << n[0] << ',' << n[1]
                << ',' << n[2] << '\n';
          }
      write_text(path("candidates.csv"), csv.str());
      for (const char* f : {"st.f32", "rstar.f32", "nstar.f32", "candidates.csv"}) r.output(path(f));
      r.results = {{"sh_rel_residual", e.rel_residual},
                   {"st_max", tf.st.empty() ? 0.0 : *std::max_element(tf.st.begin(), tf.st.end())},
                   {"centers", seg.centers}};
    };
  });
}

void add_synth(CLI::App& app, Action& out, std::string& name) {
  auto* c = app.add_subcommand("synth", "synthetic phantoms");
  struct O {
    std::string kind = "tube", output, truth, radius = "1:10";
    std::uint64_t seed = 7;
    int dims = 64, count = 1;
    double noise = 0.1, contrast = 1.0, angle = 90.0, thickness = 6.0;
  };
  auto o = std::make_shared<O>();
  c->add_option("--kind", o->kind)->check(CLI::IsMember({"tube", "crossing", "plate"}));
  c->add_option("--seed", o->seed);
  c->add_option("--dims", o->dims);
  c->add_option("--radius", o->radius, "min:max for tubes, single value for crossings");
  c->add_option("--noise", o->noise, "Gaussian noise standard deviation");
  c->add_option("--contrast", o->contrast);
  c->add_option("--count", o->count, "number of random tubes");
  c->add_option("--angle", o->angle, "crossing angle, degrees");
  c->add_option("--thickness", o->thickness, "plate thickness");
  c->add_option("-o,--output", o->output)->required();
  c->add_option("--truth", o->truth, "centerline CSV");
  c->callback([&out, &name, o] {
    name = "synth";
    out = [o](Run& r) {
      if (o->dims < 8) throw ParameterError("dims must be >= 8");
      if (o->noise < 0.0) throw ParameterError("noise must be >= 0");
      const auto [r0, r1] = parse_range(o->radius);
      r.params = {{"kind", o->kind},   {"seed", o->seed},       {"dims", o->dims},   {"radius", {r0, r1}},
                  {"noise", o->noise}, {"contrast", o->contrast}, {"count", o->count}, {"angle", o->angle},
                  {"thickness", o->thickness}};
      const Dims d = cube(o->dims);
      std::vector<TubeTruth> truth;
      Volume f;
      if (o->kind == "tube") {
        if (o->count < 1) throw ParameterError("count must be >= 1");
        std::vector<TubePhantomSpec> specs;
        for (int k = 0; k < o->count; ++k)
          specs.push_back(random_tube_spec(o->seed * 1000 + k, d, r0, r1, o->noise, o->contrast));
        f = make_tubes(specs, o->noise, o->seed, &truth);
      } else if (o->kind == "crossing") {
        f = make_crossing(d, r0, o->contrast, o->noise, o->seed, &truth, o->angle * M_PI / 180.0);
      } else {
        f = make_plate(d, o->thickness, o->contrast, o->noise, o->seed);
      }
      write_volume(f, o->output);
      r.output(o->output);
      if (!o->truth.empty()) {
        write_truth_csv(truth, o->truth);
        r.output(o->truth);
      }
    };
  });
}

void add_cnr(CLI::App& app, Action& out, std::string& name) {
  auto* c = app.add_subcommand("cnr", "contrast-to-noise ratio");
  struct O {
    std::string input, regions;
  };
  auto o = std::make_shared<O>();
  c->add_option("-i,--input", o->input)->required();
  c->add_option("--regions", o->regions)->required();
  c->callback([&out, &name, o] {
    name = "cnr";
    out = [o](Run& r) {
      const auto f = read_volume(o->input);
      const auto reg = RegionSpec::from_json_file(o->regions, f.dims);
      r.input(o->input);
      r.input(o->regions);
      r.results = {{"cnr", cnr(f, reg)}};
    };
  });
}

void add_compare(CLI::App& app, Action& out, std::string& name) {
  auto* c = app.add_subcommand("compare-filters", "per-orientation agreement of two banks");
  struct O {
    std::string a, b, output;
  };
  auto o = std::make_shared<O>();
  c->add_option("--dft", o->a, "first bank")->required();
  c->add_option("--zernike", o->b, "second bank")->required();
  c->add_option("-o,--output", o->output, "output prefix")->required();
  c->callback([&out, &name, o] {
    name = "compare-filters";
    out = [o](Run& r) {
      const auto a = read_bank(o->a);
      const auto b = read_bank(o->b);
      r.input(o->a);
      r.input(o->b);
      const auto cmp = compare_filters(a, b);
      std::ostringstream csv;
      csv.precision(12);
      csv << "orientation,ncc,l2_residual,max_re_a,max_im_a,max_re_b,max_im_b\n";
      for (std::size_t i = 0; i < cmp.ncc.size(); ++i)
        csv << i << ',' << cmp.ncc[i] << ',' << cmp.l2_residual[i] << ',' << cmp.max_re_a[i] << ','
            << cmp.max_im_a[i] << ',' << cmp.max_re_b[i] << ',' << cmp.max_im_b[i] << '\n';
      write_text(o->output + "_compare.csv", csv.str());
      write_text(o->output + "_slices_a.csv", slice_csv(a));
      write_text(o->output + "_slices_b.csv", slice_csv(b));
      for (const char* s : {"_compare.csv", "_slices_a.csv", "_slices_b.csv"}) r.output(o->output + s);
      r.results = cmp.to_json();
    };
  });
}

void add_roundtrip(CLI::App& app, Action& out, std::string& name) {
  auto* c = app.add_subcommand("roundtrip", "transform then reconstruct, with error report");
  struct O {
    std::string input, bank, mode = "exact", output;
    int dims = 64;
    std::uint64_t seed = 1;
    double cutoff = 0.8;
  };
  auto o = std::make_shared<O>();
  c->add_option("-i,--input", o->input, "volume; omitted: band-limited noise phantom");
  c->add_option("-b,--bank", o->bank)->required();
  c->add_option("--mode", o->mode)->check(CLI::IsMember({"exact", "sum"}));
  c->add_option("--dims", o->dims, "phantom edge");
  c->add_option("--seed", o->seed, "phantom seed");
  c->add_option("--cutoff", o->cutoff, "phantom band limit as a fraction of varrho");
  c->add_option("-o,--output", o->output, "output prefix for slices");
  c->callback([&out, &name, o] {
    name = "roundtrip";
    out = [o](Run& r) {
      const auto bank = read_bank(o->bank);
      r.input(o->bank);
      Volume f;
      if (!o->input.empty()) {
        f = read_volume(o->input);
        r.input(o->input);
      } else {
        const double varrho = bank.params.value("gamma", 0.85) * M_PI / bank.spacing[0];
        f = band_limited_phantom(cube(o->dims), o->cutoff * varrho, o->seed, bank.spacing);
      }
      r.params = {{"mode", o->mode}, {"dims", f.dims}, {"seed", o->seed}, {"cutoff", o->cutoff}};
      Volume g;
      const auto rep = roundtrip(f, bank, o->mode, &g);
      r.results = rep.to_json();
      if (!o->output.empty()) {
        std::ostringstream csv;
        csv.precision(9);
        csv << "x,y,input,output\n";
        const int z = f.dims[2] / 2;
        for (int y = 0; y < f.dims[1]; ++y)
          for (int x = 0; x < f.dims[0]; ++x) csv << x << ',' << y << ',' << f(x, y, z) << ',' << g(x, y, z) << '\n';
        write_text(o->output + "_slice.csv", csv.str());
        r.output(o->output + "_slice.csv");
      }
    };
  });
}

void add_sweep(CLI::App& app, Action& out, std::string& name) {
  auto* c = app.add_subcommand("cnr-sweep", "CNR against diffusion time, CEDOS and Gaussian");
  struct O {
    std::string input, bank, regions, output, times = "0:6:1";
    DiffusionConfig cfg;
  };
  auto o = std::make_shared<O>();
  c->add_option("-i,--input", o->input)->required();
  c->add_option("-b,--bank", o->bank)->required();
  c->add_option("--regions", o->regions)->required();
  c->add_option("--times", o->times, "a:b:step or comma list");
  c->add_option("-o,--output", o->output, "CSV")->required();
  add_diffusion_options(c, o->cfg);
  c->callback([&out, &name, o] {
    name = "cnr-sweep";
    out = [o](Run& r) {
      o->cfg.validate();
      const auto f = read_volume(o->input);
      const auto bank = read_bank(o->bank);
      const auto reg = RegionSpec::from_json_file(o->regions, f.dims);
      r.input(o->input);
      r.input(o->bank);
      r.input(o->regions);
      const auto T = parse_times(o->times);
      r.params = o->cfg.to_json();
      r.params["times"] = T;
      const auto s = cnr_sweep(f, reg, bank, o->cfg, T);
      write_text(o->output, s.csv());
      r.output(o->output);
      const auto flat = [](const std::vector<double>& v, int k) { return (v[k] - v.back()) / v[k]; };
      r.results = {{"cedos_peak_T", T[s.cedos_peak()]},
                   {"gauss_peak_T", T[s.gauss_peak()]},
                   {"cedos_peak", s.cedos[s.cedos_peak()]},
                   {"gauss_peak", s.gauss[s.gauss_peak()]},
                   {"cedos_drop", flat(s.cedos, s.cedos_peak())},
                   {"gauss_drop", flat(s.gauss, s.gauss_peak())},
                   {"diffusion", s.report.to_json()}};
    };
  });
}

}  // namespace

void register_commands(CLI::App& app, Action& out, std::string& name) {
  add_design(app, out, name);
  add_transform(app, out, name);
  add_reconstruct(app, out, name);
  add_stability(app, out, name);
  add_cedos(app, out, name);
  add_tubularity(app, out, name);
  add_synth(app, out, name);
  add_cnr(app, out, name);
  add_compare(app, out, name);
  add_roundtrip(app, out, name);
  add_sweep(app, out, name);
}

}  // namespace ost::cli
