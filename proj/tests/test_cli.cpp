#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "epchain/commands.hpp"
#include "epchain/config.hpp"
#include "epchain/csv.hpp"
#include "epchain/error.hpp"

using namespace epchain;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "epchain");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_dir() {
  const fs::path p = fs::temp_directory_path() / ("epchain_test_" + std::to_string(::getpid()));
  fs::create_directories(p);
  return p;
}

std::string strip_version(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line))
    if (line.rfind("# epchain-version", 0) != 0) out += line + "\n";
  return out;
}

}  // namespace

TEST(Config, DefaultsAndMerge) {
  RunConfig c;
  EXPECT_EQ(c.L, 6);
  EXPECT_EQ(c.t_max, 30.0);
  EXPECT_EQ(c.rel_tol, 1e-10);
  merge_config(c, nlohmann::json::parse(R"({"L": 4, "delta": -0.1, "observables": ["C1"], "init": "polarized", "seed": 12})"));
  EXPECT_EQ(c.L, 4);
  EXPECT_EQ(c.delta, -0.1);
  EXPECT_EQ(c.observables, std::vector<std::string>{"C1"});
  EXPECT_EQ(c.init.kind, "polarized");
  EXPECT_EQ(c.seed, 12u);
  merge_config(c, nlohmann::json::parse(R"({"init": {"kind": "gaussian_defect", "center": 3, "width": 2}})"));
  EXPECT_EQ(c.init.center, 3.0);
  EXPECT_EQ(c.init.width, 2.0);
}

TEST(Config, Rejections) {
  RunConfig c;
  EXPECT_THROW(merge_config(c, nlohmann::json::parse(R"({"Lx": 4})")), ConfigError);
  EXPECT_THROW(merge_config(c, nlohmann::json::parse(R"({"L": "four"})")), ConfigError);
  EXPECT_THROW(merge_config(c, nlohmann::json::parse(R"({"seed": -1})")), ConfigError);
  EXPECT_THROW(merge_config(c, nlohmann::json::parse(R"({"init": {"kind": "defect", "color": 1}})")), ConfigError);
  EXPECT_THROW(merge_config(c, nlohmann::json::parse("[1, 2]")), ConfigError);
  RunConfig bad;
  bad.t_max = 0;
  EXPECT_THROW(validate_config(bad), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/epchain.json"), ConfigError);
}

TEST(Config, RoundTrip) {
  RunConfig c;
  c.L = 3;
  c.init = parse_init("defect:2:0.5:0.25");
  RunConfig d;
  merge_config(d, to_json(c));
  EXPECT_EQ(to_json(d), to_json(c));
}

TEST(Config, InitAndGridParsing) {
  auto d = parse_init("defect:3");
  EXPECT_EQ(d.defect.site, 3);
  EXPECT_NEAR(d.defect.theta, M_PI / 2, 1e-15);
  auto g = parse_init("gaussian_defect:5:1.5");
  EXPECT_EQ(g.center, 5.0);
  EXPECT_EQ(g.width, 1.5);
  EXPECT_THROW(parse_init("spiral"), UsageError);
  EXPECT_THROW(parse_init("uniform:3"), UsageError);

  const auto log5 = parse_grid("1e-3:1e-1:log5");
  ASSERT_EQ(log5.size(), 5u);
  EXPECT_NEAR(log5[0], 1e-3, 1e-18);
  EXPECT_NEAR(log5[2], 1e-2, 1e-16);
  EXPECT_NEAR(log5[4], 1e-1, 1e-15);
  EXPECT_EQ(parse_grid("0:1:lin3"), (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(parse_grid("0.1,0.2"), (std::vector<double>{0.1, 0.2}));
  EXPECT_THROW(parse_grid("0:1:log3"), UsageError);
  EXPECT_THROW(parse_grid("a,b"), UsageError);
}

TEST(Csv, RenderParseRoundTrip) {
  CsvTable t;
  t.comments = {"hello"};
  t.columns = {"a", "b"};
  t.add_row({format_double(0.1), format_double(1e-300)});
  t.add_row({format_double(-2.5), "x"});
  EXPECT_THROW(t.add_row({"1"}), UsageError);
  const auto text = render_csv(t);
  EXPECT_EQ(text.rfind("# hello\na,b\n", 0), 0u);
  const auto back = parse_csv(text);
  EXPECT_EQ(back.columns, t.columns);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.comments, t.comments);
  EXPECT_EQ(std::stod(back.rows[0][0]), 0.1);
  EXPECT_EQ(back.column("b"), 1u);
  EXPECT_THROW(back.column("c"), UsageError);
}

TEST(Csv, AtomicWrite) {
  const auto dir = temp_dir();
  const auto path = (dir / "x.csv").string();
  write_file_atomic(path, "abc\n");
  std::ifstream f(path);
  std::string s;
  std::getline(f, s);
  EXPECT_EQ(s, "abc");
  EXPECT_FALSE(fs::exists(path + ".tmp"));
  EXPECT_THROW(write_file_atomic((dir / "missing" / "y.csv").string(), "z"), ConfigError);
}

TEST(Cli, ComsSymbolicAllZero) {
  const auto r = cli({"coms", "--L", "6", "--n", "all", "--check", "symbolic"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["all_zero"].get<bool>());
  for (const auto& e : j["coms"]) EXPECT_EQ(e["symbolic_residual_terms"], 0);
}

TEST(Cli, ComsOffEpNotZero) {
  const auto r = cli({"coms", "--L", "3", "--delta", "0.1", "--n", "1", "--check", "symbolic", "--emit-operators"});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_FALSE(j["all_zero"].get<bool>());
  EXPECT_EQ(j["coms"][0]["operator"]["L"], 3);
}

TEST(Cli, EvolveConstantAtEp) {
  const auto r = cli({"evolve", "--L", "6", "--delta", "0", "--obs", "C1,C2,C3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = parse_csv(r.out);
  EXPECT_EQ(t.columns, (std::vector<std::string>{"t", "C1_re", "C1_im", "C2_re", "C2_im", "C3_re", "C3_im"}));
  EXPECT_EQ(t.rows.size(), 301u);
  for (std::size_t c = 1; c < t.columns.size(); c += 2) {
    const double v0 = std::stod(t.rows[0][c]);
    for (const auto& row : t.rows) EXPECT_LT(std::abs(std::stod(row[c]) - v0), 1e-8 * std::max(1.0, std::abs(v0)));
  }
  // Provenance header carries the resolved config.
  bool has_config = false;
  for (const auto& c : t.comments)
    if (c.rfind("config ", 0) == 0) {
      const auto j = nlohmann::json::parse(c.substr(7));
      EXPECT_EQ(j["L"], 6);
      EXPECT_EQ(j["observables"].size(), 3u);
      has_config = true;
    }
  EXPECT_TRUE(has_config);
}

TEST(Cli, GoldenFileStability) {
  const auto dir = temp_dir();
  const auto a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  ASSERT_EQ(cli({"circuit", "--shots", "3000", "--seed", "77", "--output", a}).code, 0);
  ASSERT_EQ(cli({"circuit", "--shots", "3000", "--seed", "77", "--output", b}).code, 0);
  std::ifstream fa(a), fb(b);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  // Differences can only come from the command line (output path), which is recorded.
  auto body = [](const std::string& s) {
    std::string out;
    std::istringstream in(strip_version(s));
    std::string line;
    while (std::getline(in, line))
      if (line.rfind("# config", 0) != 0 && line.rfind("# command", 0) != 0) out += line + "\n";
    return out;
  };
  EXPECT_EQ(body(sa.str()), body(sb.str()));
  const auto e1 = cli({"evolve", "--L", "3", "--t-max", "2"}), e2 = cli({"evolve", "--L", "3", "--t-max", "2"});
  EXPECT_EQ(strip_version(e1.out), strip_version(e2.out));
}

TEST(Cli, CircuitColumns) {
  const auto r = cli({"circuit", "--shots", "2000", "--steps", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = parse_csv(r.out);
  EXPECT_EQ(t.columns, (std::vector<std::string>{"step", "t", "total", "accepted", "all_down", "c1_raw",
                                                 "c1_raw_stderr", "c1_norm", "c1_norm_stderr", "c1_exact"}));
  EXPECT_EQ(t.rows.size(), 6u);
}

TEST(Cli, DensityColumnsAndSummary) {
  const auto dir = temp_dir();
  const auto path = (dir / "d.csv").string();
  const auto r = cli({"density", "--L", "5", "--t-max", "2", "--init", "gaussian_defect:3:1", "--output", path});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_LT(j["max_residual"].get<double>(), 1e-9);
  const auto t = read_csv(path);
  EXPECT_EQ(t.columns, (std::vector<std::string>{"t", "site", "mx", "current", "residual"}));
}

TEST(Cli, SweepThenFit) {
  const auto dir = temp_dir();
  const auto sweep = (dir / "s.csv").string(), scaling = (dir / "scaling.csv").string();
  ASSERT_EQ(cli({"sweep", "--L", "3", "--deltas", "0.01,0.02,0.05,0.1", "--both-signs", "--output", sweep}).code, 0);
  const auto r = cli({"fit-tau", "--input", sweep, "--output", scaling});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = read_csv(scaling);
  EXPECT_EQ(t.columns, (std::vector<std::string>{"delta", "observable", "model", "tau", "rms", "converged"}));
  EXPECT_EQ(t.rows.size(), 8u);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["branches"].size(), 2u);
}

TEST(Cli, BlockAndCorrespondence) {
  const auto b = cli({"block", "--N", "4", "--E", "0.3"});
  ASSERT_EQ(b.code, 0) << b.err;
  const auto jb = nlohmann::json::parse(b.out);
  EXPECT_EQ(jb["bruteforce_dim"], 4);
  EXPECT_TRUE(jb["obstruction"]["passed"].get<bool>());
  const auto c = cli({"correspondence", "--L", "3", "--delta", "0.5"});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_LT(nlohmann::json::parse(c.out)["max_residual"].get<double>(), 1e-10);
}

TEST(Cli, ConfigFileWithOverride) {
  const auto dir = temp_dir();
  const auto cfg = (dir / "c.json").string();
  std::ofstream(cfg) << R"({"L": 2, "t_max": 1.0, "observables": ["C1"]})";
  const auto r = cli({"evolve", "--config", cfg, "--L", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = parse_csv(r.out);
  EXPECT_EQ(t.rows.size(), 11u);
  EXPECT_NEAR(std::stod(t.rows[0][1]), 0.125, 1e-15);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"bogus"}).code, kExitUsage);
  EXPECT_EQ(cli({"evolve", "--L", "x"}).code, kExitUsage);
  EXPECT_EQ(cli({"evolve", "--method", "euler", "--L", "2"}).code, kExitUsage);
  EXPECT_EQ(cli({"evolve", "--help"}).code, kExitOk);
  EXPECT_EQ(cli({"coms", "--L", "12", "--check", "numeric"}).code, kExitUsage);

  const auto dir = temp_dir();
  const auto bad = (dir / "bad.json").string();
  std::ofstream(bad) << R"({"L": 2, "colour": 1})";
  EXPECT_EQ(cli({"evolve", "--config", bad}).code, kExitConfig);
  EXPECT_EQ(cli({"evolve", "--config", (dir / "none.json").string()}).code, kExitConfig);
  EXPECT_EQ(cli({"evolve", "--t-max", "-1"}).code, kExitConfig);

  // Strong gain at long times overflows the norm guard.
  EXPECT_EQ(cli({"evolve", "--L", "3", "--delta", "-1", "--t-max", "500", "--dt-out", "10"}).code, kExitNumerical);
}
