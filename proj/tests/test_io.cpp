#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"

using namespace dbarns;
using namespace testing_util;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dbarns_io_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

bool same_tree(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> fa, fb;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) fa.push_back(fs::relative(e.path(), a));
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) fb.push_back(fs::relative(e.path(), b));
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  if (fa != fb) return false;
  for (const auto& f : fa)
    if (slurp(a / f) != slurp(b / f)) return false;
  return true;
}

}  // namespace

TEST(Io, FieldRoundTripIsBitExact) {
  const auto g = make_grid(2, 4);
  for (auto rep : {Representation::physical, Representation::fourier}) {
    const auto u = random_field(g, 1, 3).as(rep);
    const auto dir = scratch("field");
    save_field(dir, u, {"abcd1234", 0.25, 42});
    const auto v = load_field(dir);
    EXPECT_EQ(u, v);
    const auto meta = field_metadata(dir);
    EXPECT_EQ(meta.config_hash, "abcd1234");
    EXPECT_EQ(meta.time, 0.25);
    EXPECT_EQ(meta.seed, 42u);
  }
}

TEST(Io, ManifestDescribesLayout) {
  const auto g = make_grid(2, 4);
  const auto dir = scratch("manifest");
  save_field(dir, random_field(g, 2, 1), {});
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(m.at("components").size(), 1u);
  EXPECT_EQ(m.at("layout").at("bytes_per_component").get<std::size_t>(), 256u * 16u);
  EXPECT_EQ(m.at("layout").at("byte_order"), "little");
  EXPECT_EQ(fs::file_size(dir / m.at("blobs")[0].at("file").get<std::string>()), 256u * 16u);
}

TEST(Io, LittleEndianByDefinition) {
  const auto g = make_grid(2, 4);
  FormField u(g, 0);
  u[0][0] = cplx(1.0, -2.0);
  const auto dir = scratch("endian");
  save_field(dir, u, {});
  const std::string bytes = slurp(dir / "component_0.bin");
  // 1.0 = 0x3ff0000000000000, -2.0 = 0xc000000000000000, low byte first.
  const unsigned char one[8] = {0, 0, 0, 0, 0, 0, 0xf0, 0x3f};
  const unsigned char mtwo[8] = {0, 0, 0, 0, 0, 0, 0, 0xc0};
  for (int b = 0; b < 8; ++b) {
    EXPECT_EQ(static_cast<unsigned char>(bytes[b]), one[b]);
    EXPECT_EQ(static_cast<unsigned char>(bytes[8 + b]), mtwo[b]);
  }
}

TEST(Io, TruncationAndCorruptionAreRejected) {
  const auto g = make_grid(2, 4);
  const auto dir = scratch("corrupt");
  save_field(dir, random_field(g, 1, 5), {});
  const auto blob = dir / "component_1.bin";
  std::string bytes = slurp(blob);
  {
    std::ofstream out(blob, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 16));
  }
  EXPECT_THROW(load_field(dir), FormatError);
  bytes[100] ^= 0x01;
  {
    std::ofstream out(blob, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  EXPECT_THROW(load_field(dir), FormatError);
}

TEST(Io, VersionMismatch) {
  const auto g = make_grid(2, 4);
  const auto dir = scratch("version");
  save_field(dir, random_field(g, 1, 5), {});
  auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  m["schema_version"] = 99;
  std::ofstream(dir / "manifest.json") << m.dump();
  EXPECT_THROW(load_field(dir), FormatError);
}

TEST(Io, ConfigRoundTripAndValidation) {
  const nlohmann::json j = {{"n", 2},
                            {"q", 1},
                            {"N", 8},
                            {"mu", 0.5},
                            {"T", 0.2},
                            {"dt", 0.01},
                            {"nonlinearity", "lamb"},
                            {"forcing", {{"kind", "single_mode"}, {"zeta", {1, 0, 0, 0}}, {"J", {2}}, {"re", 0.1}}},
                            {"output_stride", 2},
                            {"seed", 17},
                            {"initial", {{"kind", "random_solenoidal"}, {"decay", 3.0}}}};
  const auto rc = config_from_json(j);
  EXPECT_EQ(rc.sim.nonlinearity.kind, BilinearSpec::Kind::lamb);
  EXPECT_EQ(rc.sim.output_stride, 2);
  EXPECT_EQ(rc.initial.seed, 17u);
  EXPECT_EQ(rc.initial.decay, 3.0);
  const auto again = config_from_json(config_to_json(rc));
  EXPECT_EQ(config_to_json(again), config_to_json(rc));
  EXPECT_EQ(config_hash(config_to_json(again)), config_hash(config_to_json(rc)));

  auto bad = j;
  bad["q"] = 2;
  EXPECT_THROW(config_from_json(bad), ParameterError);
  bad = j;
  bad["viscosity"] = 1.0;
  EXPECT_THROW(config_from_json(bad), ParameterError);
  bad = j;
  bad["N"] = "eight";
  EXPECT_THROW(config_from_json(bad), ParameterError);
}

TEST(Io, TrajectoryRoundTripAndReproducibility) {
  const nlohmann::json j = {{"n", 2}, {"q", 1}, {"N", 8}, {"mu", 0.5}, {"T", 0.1}, {"dt", 0.01},
                            {"nonlinearity", "lamb"}, {"output_stride", 5}, {"seed", 3}};
  const auto rc = config_from_json(j);
  auto run = [&](const fs::path& dir) {
    const auto g = make_grid(2, 8);
    const auto t = simulate(rc.sim, gen_initial(rc.initial, g, 1));
    save_trajectory(dir, t, config_to_json(rc));
    return t;
  };
  const auto a = scratch("traj_a"), b = scratch("traj_b");
  const auto ta = run(a);
  run(b);
  EXPECT_TRUE(same_tree(a, b));
  EXPECT_TRUE(fs::exists(a / "u_000000" / "manifest.json"));
  EXPECT_TRUE(fs::exists(a / "p_000002" / "manifest.json"));
  EXPECT_EQ(slurp(a / "diagnostics.csv").substr(0, 55), "t,energy,dbar_norm_sq,dbar_star_residual,max_abs_u,lps_");

  const auto back = load_trajectory(a);
  ASSERT_EQ(back.velocity.size(), ta.velocity.size());
  for (std::size_t i = 0; i < back.velocity.size(); ++i) {
    EXPECT_EQ(back.velocity[i], ta.velocity[i]);
    EXPECT_EQ(back.pressure[i], ta.pressure[i]);
    EXPECT_EQ(back.times[i], ta.times[i]);
  }
  ASSERT_EQ(back.diagnostics.size(), ta.diagnostics.size());
  for (std::size_t i = 0; i < back.diagnostics.size(); ++i) {
    EXPECT_EQ(back.diagnostics[i].energy, ta.diagnostics[i].energy);
    EXPECT_EQ(back.diagnostics[i].lps_accum, ta.diagnostics[i].lps_accum);
    EXPECT_EQ(back.diagnostics[i].forcing_power, ta.diagnostics[i].forcing_power);
  }
  EXPECT_EQ(back.mu, 0.5);
  EXPECT_EQ(back.stride, 5);
  const auto hash = config_hash(config_to_json(rc));
  EXPECT_EQ(field_metadata(a / "u_000001").config_hash, hash);
  EXPECT_EQ(field_metadata(a / "u_000001").time, ta.times[1]);
}

TEST(Io, ForcingFromFile) {
  const auto g = make_grid(2, 8);
  const auto dir = scratch("forcing");
  fs::create_directories(dir);
  FormField f(g, 1, Representation::fourier);
  const std::vector<int> z{0, 1, 0, 0};
  f[0][g->flat_index(z)] = 0.2;
  save_field(dir / "f", f, {});
  const nlohmann::json j = {{"N", 8}, {"T", 0.1}, {"dt", 0.05}, {"forcing", {{"kind", "file"}, {"path", "f"}}}};
  std::ofstream(dir / "config.json") << j.dump();
  const auto rc = load_config(dir / "config.json");
  ASSERT_EQ(rc.sim.forcing.kind, ForcingSpec::Kind::file);
  EXPECT_EQ(rc.sim.forcing.evaluate(g, 1, 0.0), f);
}

TEST(Io, InitialConditions) {
  const auto g = make_grid(2, 8);
  InitialSpec s;
  s.kind = InitialSpec::Kind::single_mode;
  s.zeta = {1, 1, 0, 0};
  s.component = {1};
  const auto u = gen_initial(s, g, 1);
  EXPECT_LT(constraint_residual(u), 1e-12 * l2_norm(u));
  s.zeta = {1, 0, 0, 0};
  EXPECT_THROW(gen_initial(s, g, 1), ParameterError);

  InitialSpec r;
  r.seed = 5;
  EXPECT_EQ(gen_initial(r, g, 1), gen_initial(r, g, 1));
  const auto ru = gen_initial(r, g, 1);
  EXPECT_LT(constraint_residual(ru), 1e-12 * l2_norm(ru));
  EXPECT_NEAR(l2_norm(ru), std::sqrt(g->volume()), 1e-10 * l2_norm(ru));

  InitialSpec tg;
  tg.kind = InitialSpec::Kind::taylor_green_analog;
  const auto t = gen_initial(tg, g, 1);
  EXPECT_GT(l2_norm(t), 0.0);
  EXPECT_LT(constraint_residual(t), 1e-12 * l2_norm(t));
  const auto g3 = make_grid(3, 4);
  EXPECT_THROW(gen_initial(tg, g3, 2), ParameterError);
}

TEST(Io, SpectrumSlopeFollowsDecay) {
  const auto g = make_grid(2, 16);
  InitialSpec s;
  s.seed = 11;
  s.decay = 3.0;
  const auto u = gen_initial(s, g, 1);
  EXPECT_TRUE(std::isfinite(sobolev_hs(u, 2)));
  // mean |û|² per exact |ζ|² level against |ζ|: slope of log|û| is -decay.
  std::map<double, std::pair<double, int>> shells;
  for (std::size_t m = 1; m < g->size(); ++m) {
    if (!g->kept(m)) continue;
    double e = 0;
    for (std::size_t c = 0; c < u.count(); ++c) e += std::norm(u[c][m]);
    shells[g->ksq(m)].first += e;
    shells[g->ksq(m)].second += 1;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (const auto& [ksq, v] : shells) {
    if (ksq > 25) continue;
    const double x = 0.5 * std::log(ksq), y = 0.5 * std::log(v.first / v.second);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  EXPECT_NEAR(slope, -3.0, 0.3);
}
