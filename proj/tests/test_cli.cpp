#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "soslyap/sos/sdpa.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(SOSLYAP_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "soslyap_test_cli";
  std::filesystem::create_directories(dir);
  return dir / name;
}

nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

const char* kConservative =
    "--field '-x1^3*x2^2 + 2*x1^3*x2 - x1^3 + 4*x1^2*x2^2 - 8*x1^2*x2 + 4*x1^2 - x1*x2^4 + 4*x1*x2^3 - 4*x1 + 10*x2^2' "
    "--field '-9*x1^2*x2 + 10*x1^2 + 2*x1*x2^3 - 8*x1*x2^2 - 4*x1 - x2^3 + 4*x2^2 - 4*x2'";

}  // namespace

TEST(Cli, Savings) {
  const auto r = cli("savings --n 2 --d 4");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "vars_saved=105 eqs_saved=36\n");
}

TEST(Cli, CheckSosVerdicts) {
  const auto sq = cli("check-sos 'x1^2+2*x1*x2+x2^2'");
  EXPECT_EQ(sq.code, 0);
  EXPECT_EQ(sq.out.rfind("FEASIBLE", 0), 0u) << sq.out;
  const auto mot = cli("check-sos 'x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1'");
  EXPECT_EQ(mot.code, 0);
  EXPECT_EQ(mot.out.rfind("INFEASIBLE", 0), 0u) << mot.out;
}

TEST(Cli, CheckSosJson) {
  const auto path = scratch("sq.json");
  ASSERT_EQ(cli("check-sos 'x1^2+2*x1*x2+x2^2' --json " + path.string()).code, 0);
  const auto j = read_json(path);
  EXPECT_EQ(j.at("status"), "feasible");
}

TEST(Cli, ParseErrorReportsLocation) {
  const auto r = cli("check-sos 'x1^2 + 3*x1*'");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("line 1, column 13"), std::string::npos) << r.out;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("no-such-command").code, 2);
  EXPECT_EQ(cli("find-lyapunov --field -x1 --mode bogus").code, 2);
  EXPECT_EQ(cli("common-lyapunov --matrix -1 --time xt").code, 2);
  EXPECT_EQ(cli("savings --n 0 --d 1").code, 2);
}

TEST(Cli, FindLyapunovTableAndVerify) {
  const auto path = scratch("conservative.json");
  const auto r = cli(std::string("find-lyapunov ") + kConservative + " --degree-max 4 --json " + path.string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("INFEASIBLE"), std::string::npos);
  EXPECT_NE(r.out.find("verification: verified"), std::string::npos) << r.out;
  const auto v = cli("verify " + path.string());
  EXPECT_EQ(v.code, 0) << v.out;
}

TEST(Cli, VerifyRejectsCorruptedCertificate) {
  const auto path = scratch("decay.json");
  ASSERT_EQ(cli("find-lyapunov --field -x1 --field -x2 --degree-max 2 --json " + path.string()).code, 0);
  auto j = read_json(path);
  nlohmann::json* cert = nullptr;
  for (auto& row : j)
    if (row.contains("certificate") && !row.at("certificate").is_null()) cert = &row.at("certificate");
  ASSERT_NE(cert, nullptr);
  (*cert)["V"] = "x1^2 + 0.5*x2^2 + 0.25*x1*x2";
  const auto bad = scratch("decay_bad.json");
  std::ofstream(bad) << j.dump();
  const auto r = cli("verify " + bad.string());
  EXPECT_EQ(r.code, 1) << r.out;
}

TEST(Cli, CorpusFilter) {
  const auto path = scratch("corpus.json");
  const auto r = cli("corpus run --filter example-thc --json " + path.string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("example-thc: ok"), std::string::npos);
  const auto j = read_json(path);
  ASSERT_TRUE(j.is_array());
  EXPECT_EQ(j.size(), 1u);
  EXPECT_NE(cli("corpus list").out.find("motzkin"), std::string::npos);
}

TEST(Cli, ExportSdpaRoundTripsThroughSolver) {
  const auto path = scratch("ps.dat-s");
  ASSERT_EQ(cli("export-sdpa --poly 'x1^2+2*x1*x2+x2^2' --homogeneous --out " + path.string()).code, 0);
  std::ifstream in(path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto p = soslyap::parse_sdpa(text);
  EXPECT_EQ(p.blocks, std::vector<std::size_t>{2});
  EXPECT_EQ(soslyap::export_sdpa(p), text);
  const auto s = cli("solve-sdp " + path.string());
  EXPECT_EQ(s.code, 0);
  EXPECT_EQ(s.out.rfind("FEASIBLE", 0), 0u) << s.out;
}

TEST(Cli, ExportOnlyWritesSweepFiles) {
  const auto dir = scratch("export_only");
  std::filesystem::remove_all(dir);
  const auto r = cli("find-lyapunov --field -x1 --field -x2 --degree-max 4 --solver export-only --out-dir " + dir.string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "lyapunov-d2.dat-s"));
  EXPECT_TRUE(std::filesystem::exists(dir / "lyapunov-d4.dat-s"));
}

TEST(Cli, PowerCertificates) {
  const auto r = cli("power-cert --v 'x1^2+x2^2' --field -x1 --field -x2");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("k = 0"), std::string::npos) << r.out;
  const auto bad = cli("planar-power-cert --v 'x1^4+x1^2*x2^2' --field -x1 --field -x2");
  EXPECT_EQ(bad.code, 2) << bad.out;
}

TEST(Cli, CommonLyapunov) {
  const auto r = cli("common-lyapunov --matrix '-1,1;0,-1' --matrix '-1,0;1,-1' --degree-max 2");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("FEASIBLE"), std::string::npos);
  const auto dt = cli("common-lyapunov --time dt --matrix '0.5,0.2;0,0.4' --degree-max 2");
  EXPECT_EQ(dt.code, 0) << dt.out;
}
