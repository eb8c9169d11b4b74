/// @file io.hpp
/// @brief Field and trajectory persistence, configuration files.
///
/// A field directory holds manifest.json plus one blob per component. Each blob
/// is the component's values as little-endian IEEE-754 (re, im) double pairs,
/// row-major over (x₁, …, x_{2n}) or over the FFT index order in Fourier
/// representation. The manifest carries a CRC-32 per blob.
///
/// A trajectory directory holds manifest.json, u_%06d/ and p_%06d/ field
/// directories and diagnostics.csv.
#pragma once

#include <json.hpp>
#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dbarns/dynamics.hpp"
#include "dbarns/forms.hpp"
#include "dbarns/initial.hpp"

namespace dbarns {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr int field_schema_version = 1;
inline constexpr int trajectory_schema_version = 1;

struct FieldMetadata {
  std::string config_hash;
  double time = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::uint32_t crc32_of(const std::string& bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

inline void put_le(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
}

inline double get_le(const char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  return std::bit_cast<double>(bits);
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FormatError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("short write on " + p.string());
}

inline json read_json(const fs::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::exception& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
}

inline std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

inline std::string blob_name(std::size_t c) { return "component_" + std::to_string(c) + ".bin"; }

}  // namespace detail

inline void save_field(const fs::path& dir, const FormField& u, const FieldMetadata& meta = {}) {
  fs::create_directories(dir);
  const auto& g = *u.grid();
  const std::size_t bytes_per = g.size() * 16;
  json comps = json::array(), blobs = json::array();
  for (std::size_t c = 0; c < u.count(); ++c) {
    std::string bytes;
    bytes.reserve(bytes_per);
    for (const cplx& z : u[c]) {
      detail::put_le(bytes, z.real());
      detail::put_le(bytes, z.imag());
    }
    detail::write_file(dir / detail::blob_name(c), bytes);
    comps.push_back(u.indices()[c].indices());
    blobs.push_back({{"file", detail::blob_name(c)}, {"crc32", detail::hex32(detail::crc32_of(bytes))}});
  }
  std::vector<std::string> axes;
  for (int a = 1; a <= g.dims(); ++a) axes.push_back("x" + std::to_string(a));
  const json manifest = {
      {"schema_version", field_schema_version},
      {"n", g.n()},
      {"q", u.q()},
      {"N", g.N()},
      {"representation", to_string(u.rep())},
      {"components", comps},
      {"layout",
       {{"scalar", "complex128"},
        {"pair", "re,im"},
        {"byte_order", "little"},
        {"order", "row-major"},
        {"axes", axes},
        {"bytes_per_component", bytes_per}}},
      {"blobs", blobs},
      {"metadata", {{"config_hash", meta.config_hash}, {"time", meta.time}, {"seed", meta.seed}}}};
  detail::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

inline FieldMetadata field_metadata(const fs::path& dir) {
  const json m = detail::read_json(dir / "manifest.json");
  FieldMetadata meta;
  const auto& md = m.at("metadata");
  meta.config_hash = md.value("config_hash", "");
  meta.time = md.value("time", 0.0);
  meta.seed = md.value("seed", std::uint64_t{0});
  return meta;
}

/// Loads a field; `grid` is reused when it matches the manifest's (n, N).
inline FormField load_field(const fs::path& dir, const GridPtr& grid = nullptr) {
  const json m = detail::read_json(dir / "manifest.json");
  try {
    if (m.at("schema_version").get<int>() != field_schema_version)
      throw FormatError("unsupported field schema version " + m.at("schema_version").dump());
    const int n = m.at("n"), q = m.at("q"), N = m.at("N");
    const Representation rep = representation_from_string(m.at("representation").get<std::string>());
    const auto& layout = m.at("layout");
    if (layout.at("byte_order") != "little" || layout.at("scalar") != "complex128")
      throw FormatError("unsupported byte layout");
    GridPtr g = grid && grid->n() == n && grid->N() == N ? grid : make_grid(n, N);
    FormField u(g, q, rep);
    const auto& comps = m.at("components");
    const auto& blobs = m.at("blobs");
    if (comps.size() != u.count() || blobs.size() != u.count())
      throw FormatError("component list has " + std::to_string(comps.size()) + " entries, expected " +
                        std::to_string(u.count()));
    const std::size_t bytes_per = g->size() * 16;
    if (layout.at("bytes_per_component").get<std::size_t>() != bytes_per)
      throw FormatError("byte count does not match N^{2n}·16");
    for (std::size_t c = 0; c < u.count(); ++c) {
      if (MultiIndex(comps[c].get<std::vector<int>>(), n) != u.indices()[c])
        throw FormatError("component list out of canonical order");
      const std::string bytes = detail::read_file(dir / blobs[c].at("file").get<std::string>());
      if (bytes.size() != bytes_per)
        throw FormatError("blob " + blobs[c].at("file").get<std::string>() + " is truncated (" +
                          std::to_string(bytes.size()) + " of " + std::to_string(bytes_per) + " bytes)");
      if (detail::hex32(detail::crc32_of(bytes)) != blobs[c].at("crc32").get<std::string>())
        throw FormatError("checksum mismatch in " + blobs[c].at("file").get<std::string>());
      for (std::size_t k = 0; k < g->size(); ++k)
        u[c][k] = cplx(detail::get_le(bytes.data() + 16 * k), detail::get_le(bytes.data() + 16 * k + 8));
    }
    return u;
  } catch (const json::exception& e) {
    throw FormatError(dir.string() + "/manifest.json: " + e.what());
  } catch (const ParameterError& e) {
    throw FormatError(dir.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// configuration

struct RunConfig {
  SimConfig sim;
  InitialSpec initial;
};

inline json forcing_to_json(const ForcingSpec& f) {
  switch (f.kind) {
    case ForcingSpec::Kind::zero: return {{"kind", "zero"}};
    case ForcingSpec::Kind::single_mode:
      return {{"kind", "single_mode"}, {"zeta", f.zeta}, {"J", f.component}, {"re", f.amplitude.real()},
              {"im", f.amplitude.imag()}, {"omega", f.omega}};
    default: return {{"kind", "file"}, {"path", f.path}};
  }
}

/// `base` resolves relative forcing paths.
inline ForcingSpec forcing_from_json(const json& j, const fs::path& base = {}) {
  ForcingSpec f;
  const std::string kind = j.is_string() ? j.get<std::string>() : j.at("kind").get<std::string>();
  if (kind == "zero") return f;
  if (kind == "single_mode") {
    f.kind = ForcingSpec::Kind::single_mode;
    f.zeta = j.at("zeta").get<std::vector<int>>();
    f.component = j.at("J").get<std::vector<int>>();
    f.amplitude = cplx(j.value("re", 1.0), j.value("im", 0.0));
    f.omega = j.value("omega", 0.0);
    return f;
  }
  if (kind == "file") {
    f.kind = ForcingSpec::Kind::file;
    f.path = j.at("path").get<std::string>();
    fs::path p(f.path);
    if (p.is_relative() && !base.empty()) p = base / p;
    f.field = std::make_shared<const FormField>(load_field(p));
    return f;
  }
  throw ParameterError("unknown forcing kind '" + kind + "'");
}

inline json config_to_json(const RunConfig& rc) {
  const SimConfig& c = rc.sim;
  return {{"n", c.n},
          {"q", c.q},
          {"N", c.N},
          {"mu", c.mu},
          {"T", c.T},
          {"dt", c.dt},
          {"nonlinearity", bilinear_to_json(c.nonlinearity)},
          {"forcing", forcing_to_json(c.forcing)},
          {"output_stride", c.output_stride},
          {"cfl_safety", c.cfl_safety},
          {"cfl_shrink", c.cfl_shrink},
          {"seed", c.seed},
          {"lps_r", c.lps_r},
          {"constraint_tol", c.constraint_tol},
          {"initial", initial_to_json(rc.initial)}};
}

inline RunConfig config_from_json(const json& j, const fs::path& base = {}) {
  static const std::vector<std::string> known = {"n",           "q",          "N",          "mu",
                                                 "T",           "dt",         "nonlinearity", "forcing",
                                                 "output_stride", "cfl_safety", "cfl_shrink", "seed",
                                                 "lps_r",       "constraint_tol", "initial"};
  if (!j.is_object()) throw ParameterError("config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ParameterError("config: unknown field '" + key + "'");
  RunConfig rc;
  SimConfig& c = rc.sim;
  try {
    c.n = j.value("n", c.n);
    c.q = j.value("q", c.q);
    c.N = j.value("N", c.N);
    c.mu = j.value("mu", c.mu);
    c.T = j.value("T", c.T);
    c.dt = j.value("dt", c.dt);
    c.output_stride = j.value("output_stride", c.output_stride);
    c.cfl_safety = j.value("cfl_safety", c.cfl_safety);
    c.cfl_shrink = j.value("cfl_shrink", c.cfl_shrink);
    c.seed = j.value("seed", c.seed);
    c.lps_r = j.value("lps_r", c.lps_r);
    c.constraint_tol = j.value("constraint_tol", c.constraint_tol);
    c.nonlinearity = j.contains("nonlinearity") ? bilinear_from_json(j.at("nonlinearity"), c.n, c.q)
                                                : BilinearSpec::stokes();
    if (j.contains("forcing")) c.forcing = forcing_from_json(j.at("forcing"), base);
    if (j.contains("initial")) {
      rc.initial = initial_from_json(j.at("initial"));
      if (!j.at("initial").contains("seed")) rc.initial.seed = c.seed;
    } else {
      rc.initial.seed = c.seed;
    }
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  c.validate();
  return rc;
}

inline RunConfig load_config(const fs::path& path) {
  return config_from_json(detail::read_json(path), path.parent_path());
}

inline std::string config_hash(const json& config) {
  return detail::hex32(detail::crc32_of(config.dump()));
}

// ---------------------------------------------------------------------------
// trajectories

inline const char* diagnostics_header = "t,energy,dbar_norm_sq,dbar_star_residual,max_abs_u,lps_accum";

inline std::string diagnostics_csv(const std::vector<Diagnostics>& diags) {
  std::string out = std::string(diagnostics_header) + "\n";
  char buf[512];
  for (const auto& d : diags) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", d.t, d.energy, d.dbar_norm_sq,
                  d.dbar_star_residual, d.max_abs_u, d.lps_accum);
    out += buf;
  }
  return out;
}

inline std::vector<Diagnostics> parse_diagnostics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != diagnostics_header) throw FormatError("diagnostics.csv: bad header");
  std::vector<Diagnostics> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Diagnostics d;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf", &d.t, &d.energy, &d.dbar_norm_sq,
                    &d.dbar_star_residual, &d.max_abs_u, &d.lps_accum) != 6)
      throw FormatError("diagnostics.csv: malformed row '" + line + "'");
    d.dbar_star_norm_sq = d.dbar_star_residual * d.dbar_star_residual * d.energy;
    out.push_back(d);
  }
  return out;
}

inline std::string snapshot_name(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c_%06zu", prefix, i);
  return buf;
}

/// `config` is stored verbatim and hashed into every manifest.
inline void save_trajectory(const fs::path& dir, const Trajectory& traj, const json& config = json::object()) {
  fs::create_directories(dir);
  const std::string hash = config_hash(config);
  const std::uint64_t seed = config.value("seed", std::uint64_t{0});
  json snaps = json::array();
  for (std::size_t i = 0; i < traj.velocity.size(); ++i) {
    const FieldMetadata meta{hash, traj.times[i], seed};
    save_field(dir / snapshot_name('u', i), traj.velocity[i], meta);
    json entry = {{"t", traj.times[i]}, {"u", snapshot_name('u', i)}};
    if (i < traj.pressure.size()) {
      save_field(dir / snapshot_name('p', i), traj.pressure[i], meta);
      entry["p"] = snapshot_name('p', i);
    }
    snaps.push_back(entry);
  }
  std::vector<double> star_sq, power;
  for (const auto& d : traj.diagnostics) {
    star_sq.push_back(d.dbar_star_norm_sq);
    power.push_back(d.forcing_power);
  }
  detail::write_file(dir / "diagnostics.csv", diagnostics_csv(traj.diagnostics));
  const json manifest = {{"schema_version", trajectory_schema_version},
                         {"n", traj.grid->n()},
                         {"q", traj.q},
                         {"N", traj.grid->N()},
                         {"mu", traj.mu},
                         {"dt", traj.dt},
                         {"output_stride", traj.stride},
                         {"lps_r", traj.lps_r},
                         {"snapshots", snaps},
                         {"diagnostics", "diagnostics.csv"},
                         {"diagnostics_aux", {{"dbar_star_norm_sq", star_sq}, {"forcing_power", power}}},
                         {"config", config},
                         {"config_hash", hash},
                         {"seed", seed}};
  detail::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

inline Trajectory load_trajectory(const fs::path& dir) {
  const json m = detail::read_json(dir / "manifest.json");
  Trajectory traj;
  try {
    if (m.at("schema_version").get<int>() != trajectory_schema_version)
      throw FormatError("unsupported trajectory schema version " + m.at("schema_version").dump());
    traj.grid = make_grid(m.at("n"), m.at("N"));
    traj.q = m.at("q");
    traj.mu = m.at("mu");
    traj.dt = m.at("dt");
    traj.stride = m.at("output_stride");
    traj.lps_r = m.at("lps_r");
    for (const auto& s : m.at("snapshots")) {
      traj.times.push_back(s.at("t"));
      traj.velocity.push_back(load_field(dir / s.at("u").get<std::string>(), traj.grid));
      if (s.contains("p")) traj.pressure.push_back(load_field(dir / s.at("p").get<std::string>(), traj.grid));
    }
    traj.diagnostics = parse_diagnostics_csv(detail::read_file(dir / m.at("diagnostics").get<std::string>()));
    if (m.contains("diagnostics_aux")) {
      const auto star = m["diagnostics_aux"].at("dbar_star_norm_sq").get<std::vector<double>>();
      const auto power = m["diagnostics_aux"].at("forcing_power").get<std::vector<double>>();
      if (star.size() != traj.diagnostics.size() || power.size() != traj.diagnostics.size())
        throw FormatError("diagnostics_aux length does not match diagnostics.csv");
      for (std::size_t i = 0; i < star.size(); ++i) {
        traj.diagnostics[i].dbar_star_norm_sq = star[i];
        traj.diagnostics[i].forcing_power = power[i];
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(dir.string() + "/manifest.json: " + e.what());
  }
  return traj;
}

inline json trajectory_config(const fs::path& dir) { return detail::read_json(dir / "manifest.json").at("config"); }

}  // namespace dbarns
