#include <gtest/gtest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

const fs::path kDir = fs::temp_directory_path() / "lresp_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(LRESP_CLI) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string write_config(const std::string& name, const nlohmann::json& j) {
  fs::create_directories(kDir);
  const fs::path p = kDir / name;
  std::ofstream(p) << j.dump(2);
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Cli, SchemaErrorsExitWithTwo) {
  EXPECT_EQ(run("run --config " + write_config("nosys.json", {{"steps", 1000}})), 2);
  EXPECT_EQ(run("run --config " + write_config("unknown.json", {{"system", "sawtooth"}, {"stepz", 1}})), 2);
  EXPECT_EQ(run("run --config " + (kDir / "missing.json").string()), 2);
  EXPECT_EQ(run("run"), 2);
}

TEST(Cli, RunIsReproducible) {
  auto cfg = write_config("small.json", {{"system", "sawtooth"}, {"params", {{"a", 0.1}}}, {"steps", 5000}, {"w_max", 4}});
  const auto a = kDir / "a.json";
  const auto b = kDir / "b.json";
  ASSERT_EQ(run("run --config " + cfg + " --seed 5 --out " + a.string()), 0);
  ASSERT_EQ(run("run --config " + cfg + " --seed 5 --out " + b.string()), 0);
  const std::string text = slurp(a);
  EXPECT_FALSE(text.empty());
  EXPECT_EQ(text, slurp(b));
  auto j = nlohmann::json::parse(text);
  EXPECT_TRUE(j.dump().find("total") != std::string::npos);
}

TEST(Cli, SystemsMatchesManifest) {
  const auto out = kDir / "systems.json";
  fs::create_directories(kDir);
  ASSERT_EQ(run("systems --out " + out.string()), 0);
  auto got = nlohmann::json::parse(slurp(out));
  auto want = nlohmann::json::parse(slurp(fs::path(LRESP_SOURCE_DIR) / "data" / "systems_manifest.json"));
  EXPECT_EQ(got, want);
}

}  // namespace
