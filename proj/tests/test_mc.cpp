#include <catch2/catch_amalgamated.hpp>

#include "faft/mc.hpp"

using namespace faft;

namespace {

ExperimentSpec tiny_spec() {
  ExperimentSpec spec;
  spec.dgp.N = 30;
  spec.dgp.T = 80;
  spec.dgp.seed = 7;
  spec.beta_grid = {Eigen::VectorXd::Zero(3), Eigen::VectorXd::Constant(3, 0.6)};
  spec.tests = {parse_test_spec("g1"), parse_test_spec("g2"),
                parse_test_spec("g2adj")};
  TuningPoint tp;
  tp.label = "default";
  spec.tunings = {tp};
  spec.replications = 40;
  spec.feasible = true;
  spec.r_selection.use_icp1 = false;
  spec.r_selection.r = 3;
  return spec;
}

}  // namespace

TEST_CASE("test spec parsing") {
  CHECK(parse_test_spec("g1").id == TestId::g1);
  CHECK_FALSE(parse_test_spec("g1").adjusted);
  CHECK(parse_test_spec("g4adj").adjusted);
  CHECK(parse_test_spec("g4adj").name() == "g4adj");
  CHECK_THROWS_AS(parse_test_spec("g5"), ValidationError);
  CHECK_THROWS_AS(parse_test_spec("g1adj"), ValidationError);
}

TEST_CASE("rejection cell accounting") {
  RejectionCell cell;
  cell.replications = 200;
  cell.rejections = 10;
  cell.failures = 0;
  CHECK(cell.frequency() == Catch::Approx(0.05));
  CHECK(cell.mc_stderr() == Catch::Approx(std::sqrt(0.05 * 0.95 / 200)));
  CHECK(cell.valid());
  cell.failures = 3;  // above the 1% threshold
  CHECK_FALSE(cell.valid());
  CHECK(cell.effective() == 197);
}

TEST_CASE("experiment: identical tables regardless of worker count", "[mc]") {
  const ExperimentSpec spec = tiny_spec();
  const RejectionTable one = run_experiment(spec, 1);
  const RejectionTable two = run_experiment(spec, 2);
  const RejectionTable four = run_experiment(spec, 4);
  REQUIRE(one.cells.size() == two.cells.size());
  CHECK(one.to_csv() == two.to_csv());
  CHECK(one.to_csv() == four.to_csv());
}

TEST_CASE("experiment: adjusted rejects at least as often as raw", "[mc]") {
  const ExperimentSpec spec = tiny_spec();
  const RejectionTable table = run_experiment(spec, 2);
  for (int bi = 0; bi < 2; ++bi) {
    const RejectionCell* raw = table.find("g2", "default", bi);
    const RejectionCell* adj = table.find("g2adj", "default", bi);
    REQUIRE(raw != nullptr);
    REQUIRE(adj != nullptr);
    CHECK(adj->rejections >= raw->rejections);
  }
}

TEST_CASE("experiment: power clearly separates from size in the observed-factor design",
          "[mc]") {
  ExperimentSpec spec = tiny_spec();
  spec.dgp.N = 50;
  spec.dgp.T = 200;
  spec.feasible = false;  // observed factors: cheap and exact
  spec.replications = 60;
  spec.tests = {parse_test_spec("g1"), parse_test_spec("g3adj")};
  const RejectionTable table = run_experiment(spec, 2);
  for (const auto& name : {"g1", "g3adj"}) {
    const RejectionCell* size = table.find(name, "default", 0);
    const RejectionCell* power = table.find(name, "default", 1);
    REQUIRE(size != nullptr);
    REQUIRE(power != nullptr);
    const double gap = power->frequency() - size->frequency();
    CHECK(gap > 10.0 * size->mc_stderr());
  }
}

TEST_CASE("experiment: output formats carry every cell") {
  ExperimentSpec spec = tiny_spec();
  spec.replications = 5;
  const RejectionTable table = run_experiment(spec, 2);
  const std::string csv = table.to_csv();
  CHECK(csv.find("test,adjusted,beta,tuning,rejection,stderr,failures,"
                 "replications,valid") == 0);
  // header + one line per cell
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 3);
  const std::string text = table.to_text();
  CHECK(text.find("g2adj") != std::string::npos);
  CHECK(text.find("0.6") != std::string::npos);
}

TEST_CASE("experiment: validation catches inconsistent specs") {
  ExperimentSpec spec = tiny_spec();
  spec.replications = 0;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = tiny_spec();
  spec.beta_grid = {Eigen::VectorXd::Zero(2)};
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = tiny_spec();
  spec.tunings.push_back(spec.tunings.front());
  spec.tunings.back().cfg.pi0 = 0.6;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
}
