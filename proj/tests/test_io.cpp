#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nvgrav/io.hpp"

using namespace nvgrav;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("nvgrav_io_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(Format, NumbersRoundTripExactly) {
  for (double v : {0.0, 1.0, -2.5e-300, 1.397e9, 0.1, 6.02214076e23, 1.0 / 3.0}) {
    const auto s = io::format_number(v);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
  }
  EXPECT_EQ(io::format_number(1.5), "1.500000000000000e+00");
}

TEST(Csv, LayoutAndComments) {
  const auto s = io::to_csv({"x", "label"}, {{1.0, "a"}, {2, "b"}}, {"fingerprint=abc"});
  EXPECT_EQ(s, "# fingerprint=abc\nx,label\n1.000000000000000e+00,a\n2,b\n");
}

TEST(Csv, RejectsRaggedRows) {
  EXPECT_THROW((void)io::to_csv({"a", "b"}, {{1.0}}), InvalidArgument);
}

TEST(Files, WriteCreatesDirectories) {
  const auto dir = scratch("write");
  const auto f = dir / "deep" / "out.txt";
  io::write_file(f, "hello\n");
  EXPECT_EQ(slurp(f), "hello\n");
  io::write_file(f, "x");
  EXPECT_EQ(slurp(f), "x");
  fs::remove_all(dir);
}

TEST(Sidecar, CarriesConfigAndOptions) {
  const auto dir = scratch("sidecar");
  SystemParams p;
  p.coupling.gradient = 3e5;
  io::write_sidecar(dir / "data.csv", "map", p, 42, {{"kind", "precision"}}, {{"best", 1.5}});
  const auto j = nlohmann::json::parse(slurp(dir / "data.csv.meta.json"));
  EXPECT_EQ(j["artifact"], "nvgrav");
  EXPECT_EQ(j["command"], "map");
  EXPECT_EQ(j["file"], "data.csv");
  EXPECT_EQ(j["seed"], 42);
  EXPECT_EQ(j["fingerprint"], fingerprint(p));
  EXPECT_EQ(j["config"]["coupling"]["gradient"], 3e5);
  EXPECT_EQ(j["options"]["kind"], "precision");
  EXPECT_EQ(j["best"], 1.5);
  fs::remove_all(dir);
}

TEST(Sidecar, ConfigJsonCoversEveryKey) {
  const auto j = io::config_json(SystemParams{});
  std::size_t n = 0;
  for (const auto& [section, keys] : j.items()) n += keys.size();
  EXPECT_EQ(n, config_keys().size() + int_config_keys().size());
}

}  // namespace
