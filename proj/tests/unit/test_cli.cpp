#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(STOCHSWEEP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("stochsweep_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(Cli, ShowConfigSucceeds) { EXPECT_EQ(run_cli("show-config --preset fig3"), 0); }

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run_cli("run"), 2);
  EXPECT_EQ(run_cli("run --preset fig9"), 2);
  EXPECT_EQ(run_cli("run --preset fig1 --config x.toml"), 2);
  EXPECT_EQ(run_cli("run --preset fig1 --dt -1"), 2);
  EXPECT_EQ(run_cli("show-config --config /nonexistent/file.toml"), 2);
  const fs::path dir = scratch("bad");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.toml") << "preset = \"fig1\"\n[model]\ngamma = -1\n";
  EXPECT_EQ(run_cli("run --config " + (dir / "bad.toml").string()), 2);
  fs::remove_all(dir);
}

TEST(Cli, ConvergedRunExitsZeroAndWritesFiles) {
  const fs::path dir = scratch("ok");
  EXPECT_EQ(run_cli("run --preset fig1 --replicates 4 --dt 0.5 --deterministic --out " +
                    dir.string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "manifest.toml"));
  EXPECT_TRUE(fs::exists(dir / "trajectories.csv"));
  fs::remove_all(dir);
}

TEST(Cli, NonConvergedRunExitsFour) {
  const fs::path dir = scratch("nc");
  fs::create_directories(dir);
  std::ofstream(dir / "nc.toml") << "preset = \"fig1\"\n[grid]\ndt = 0.5\n[sweep]\n"
                                    "replicates = 4\nmax_iterations = 1\n";
  EXPECT_EQ(run_cli("run --config " + (dir / "nc.toml").string() + " --out " +
                    (dir / "out").string()),
            4);
  fs::remove_all(dir);
}

TEST(Cli, NumericalFailureExitsThree) {
  const fs::path dir = scratch("num");
  fs::create_directories(dir);
  std::ofstream(dir / "num.toml") << "preset = \"fig3\"\n[model]\ngamma = 0.01\n"
                                     "[grid]\nt_final = 1\nn_steps = 10\n"
                                     "[sweep]\nreplicates = 4\ncostate = [1e308, 0]\n";
  EXPECT_EQ(run_cli("run --config " + (dir / "num.toml").string() + " --out " +
                    (dir / "out").string()),
            3);
  fs::remove_all(dir);
}

TEST(Cli, UnwritableOutputExitsOne) {
  const fs::path dir = scratch("io");
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  EXPECT_EQ(run_cli("run --preset fig1 --replicates 4 --dt 0.5 --deterministic --out " +
                    (dir / "file" / "sub").string()),
            1);
  fs::remove_all(dir);
}

}  // namespace
