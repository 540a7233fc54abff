#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <string>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(WPSGLUE_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

nlohmann::json run_json(const std::string& args) {
  const auto r = run(args);
  EXPECT_EQ(r.code, 0) << args;
  return nlohmann::json::parse(r.out);
}

} // namespace

TEST(Cli, ClassifyExample) {
  const auto j = run_json("classify '(-5,3,2,1)'");
  EXPECT_EQ(j["provenance"]["tool"], "wpsglue");
  EXPECT_EQ(j["provenance"]["subcommand"], "classify");
  EXPECT_EQ(j["smooth"], false);
  EXPECT_EQ(j["isolated"], true);
  ASSERT_EQ(j["singular_points"].size(), 2u);
  EXPECT_EQ(j["singular_points"][0]["group_order"], 3);
}

TEST(Cli, LambdaExamples) {
  auto j = run_json("lambda '(-5,3,2,1)' --n 4");
  EXPECT_EQ(j["lambda"]["numerator"], -48);
  EXPECT_EQ(j["lambda"]["denominator"], 5);
  EXPECT_EQ(j["lambda"]["pi_power"], 1);
  j = run_json("lambda '[-1,1,1,1]' --n 3 --oracle");
  EXPECT_EQ(j["lambda"]["numerator"], -24);
  j = run_json("lambda '(-5,3,2,1)' --n 4 --vol 2/3 --I -1/2");
  // -48/5 * (3/2) * (-1/2)
  EXPECT_EQ(j["lambda"]["numerator"], 36);
  EXPECT_EQ(j["lambda"]["denominator"], 5);
}

TEST(Cli, TreeFormats) {
  const auto j = run_json("tree '(-5,3,2,1)'");
  EXPECT_EQ(j["node_count"], 4);
  EXPECT_EQ(j["is_type_I"], true);
  const auto dot = run("tree '(-5,3,2,1)' --dot");
  EXPECT_EQ(dot.code, 0);
  EXPECT_EQ(dot.out.rfind("// wpsglue 0.1.0 tree\n", 0), 0u);
  EXPECT_NE(dot.out.find("digraph resolution {"), std::string::npos);
}

TEST(Cli, GreenCsvTable) {
  const auto r = run("green --n 4 --k 3 --format csv");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\nn,k,d,lambda_flat,scaled\n"), std::string::npos);
  EXPECT_NE(r.out.find("\n4,3,0.001,"), std::string::npos);
}

TEST(Cli, FlatSolveSummary) {
  const auto j = run_json("flat-solve --k 3 --dh0 0.6 --ddh0 0.05 --dddh0 -0.01 --smax 1e4 --format json");
  EXPECT_NEAR(j["fit"]["A"].get<double>(), 0.0657, 1e-3);
  EXPECT_LE(j["fit"]["sup_abs_S"].get<double>(), 1e-7);
}

TEST(Cli, GlueReport) {
  const auto j = run_json("glue --eps 1e-2 --ppd 32");
  ASSERT_EQ(j["reports"].size(), 1u);
  EXPECT_EQ(j["reports"][0]["four_region"].size(), 4u);
  EXPECT_EQ(j["reports"][0]["three_region"].size(), 3u);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("classify '(-5,x)'").code, 2);
  EXPECT_EQ(run("classify '(-4,2,3)'").code, 0);
  EXPECT_EQ(run("tree '(-4,2,3)'").code, 2);
  EXPECT_EQ(run("lambda '(-5,3,2,1)' --n 4 --vol 0").code, 2);
  EXPECT_EQ(run("green --k 2").code, 2);
  EXPECT_EQ(run("glue --eps 0.5").code, 3);
  EXPECT_EQ(run("glue --config /nonexistent/cfg.json").code, 2);
  EXPECT_EQ(run("flat-solve --dh0 -0.5").code, 3);
}

TEST(Cli, OutputIsDeterministic) {
  for (const char* args : {"green --n 5 --k 3 --seed 9 --mc-samples 20000", "tree '(-11,4,9,1,5)' --dot",
                           "glue --eps 2e-2 --ppd 32 --format csv"}) {
    const auto a = run(args), b = run(args);
    EXPECT_EQ(a.code, 0) << args;
    EXPECT_EQ(a.out, b.out) << args;
  }
}
