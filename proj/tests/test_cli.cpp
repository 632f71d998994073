#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "cli_runner.hpp"
#include "oussm/io.hpp"
#include "oussm/modelsel.hpp"

using namespace oussm;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("oussm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  cli::Outcome run(const std::string& args) {
    return cli::run("--out-dir '" + dir_.string() + "' " + args, dir_ / "logs");
  }
  std::string data(const std::string& name) const {
    return "'" + std::string(OUSSM_DATA_DIR) + "/" + name + "'";
  }
  std::string out(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, FitJsonReloadsToIdenticalLoglik) {
  const cli::Outcome o = run("fit -i " + data("gut_real_roots.csv") + " --m 2 --n-starts 2");
  ASSERT_EQ(o.code, 0) << o.err;
  const nlohmann::json j = read_json(out("fit.json"));
  const OussmParams params = read_params(out("fit.json"));
  const TimeSeries s = read_series(std::string(OUSSM_DATA_DIR) + "/gut_real_roots.csv");
  EXPECT_EQ(loglikelihood(params, s), j["loglik"].get<double>());
  EXPECT_NO_THROW(validate_canonical(params));
  EXPECT_TRUE(j.contains("block_form"));
  EXPECT_TRUE(j.contains("spectral"));
}

TEST_F(CliTest, SelectFormulaColumnsAreExact) {
  const cli::Outcome o =
      run("select -i " + data("gut_real_roots.csv") + " --m-range 1,2 --n-starts 2");
  ASSERT_EQ(o.code, 0) << o.err;
  std::ifstream in(out("selection.csv"));
  const auto recs = parse_csv(in);
  ASSERT_EQ(recs.size(), 3u);
  const auto& h = recs[0].fields;
  ASSERT_EQ(h[0], "m");
  for (std::size_t r = 1; r < recs.size(); ++r) {
    const auto& f = recs[r].fields;
    const Index m = std::stol(f[0]), k = std::stol(f[1]), n = std::stol(f[2]);
    const double ll = std::stod(f[4]);
    const InformationCriteria ic = information_criteria(ll, m, 2, n);
    EXPECT_EQ(k, ic.k);
    EXPECT_EQ(std::stod(f[5]), ic.aic);
    EXPECT_EQ(std::stod(f[6]), ic.bic);
  }
  EXPECT_TRUE(fs::exists(out("selection.txt")));
}

TEST_F(CliTest, PredictDefaultSplitIsNinetyTen) {
  const cli::Outcome o = run("predict -i " + data("gut_real_roots.csv") + " --params " +
                             data("gut_real_roots_params.json"));
  ASSERT_EQ(o.code, 0) << o.err;
  const TimeSeries s = read_series(std::string(OUSSM_DATA_DIR) + "/gut_real_roots.csv");
  const Index n_train = static_cast<Index>(std::floor(0.9 * static_cast<double>(s.rows())));
  std::ifstream in(out("predictions.csv"));
  const auto recs = parse_csv(in);
  EXPECT_EQ(static_cast<Index>(recs.size()) - 1, (s.rows() - n_train) * s.dim());
  EXPECT_EQ(std::stod(recs[1].fields[0]), s.times[static_cast<std::size_t>(n_train)]);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("fit --bogus").code, 1);
  const cli::Outcome missing = run("fit -i " + out("absent.csv"));
  EXPECT_EQ(missing.code, 1);
  EXPECT_FALSE(missing.err.empty());
  std::ofstream(out("unstable.json"))
      << R"({"theta": [[-0.5]], "z": [[1.0]], "mu": [0.0], "h_diag": [1.0]})";
  EXPECT_EQ(run("canonicalize --params " + out("unstable.json")).code, 2);
  std::ofstream(out("cfg.json")) << R"({"sedd": 3})";
  EXPECT_EQ(run("--config " + out("cfg.json") + " simulate --scenario theta01_p2-orth --n 10").code, 1);
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  std::ofstream(out("cfg.json")) << R"({"n": 12, "seed": 5})";
  ASSERT_EQ(run("--config " + out("cfg.json") + " simulate --scenario theta01_p2-orth").code, 0);
  EXPECT_EQ(read_series(out("series.csv")).rows(), 12);
  ASSERT_EQ(run("--config " + out("cfg.json") + " simulate --scenario theta01_p2-orth --n 7").code, 0);
  EXPECT_EQ(read_series(out("series.csv")).rows(), 7);
}

TEST_F(CliTest, PreprocessCommands) {
  ASSERT_EQ(run("preprocess logratio -i " + data("gut_counts.csv")).code, 0);
  const LabeledSeries lr = read_series_labeled(out("logratio.csv"));
  EXPECT_EQ(lr.labels, (std::vector<std::string>{"genus_a", "genus_b"}));
  ASSERT_EQ(run("preprocess deseason -i " + data("sst_daily.csv")).code, 0);
  EXPECT_EQ(read_series(out("anomalies.csv")).dim(), 3);
  EXPECT_TRUE(fs::exists(out("climatology.csv")));
}
