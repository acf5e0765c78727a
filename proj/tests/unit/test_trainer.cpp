#include <doctest.h>

#include <sstream>

#include "affordmap/env/task.hpp"
#include "affordmap/proposer/proposer.hpp"
#include "affordmap/trainer/trainer.hpp"

using namespace affordmap;
using namespace affordmap::trainer;

namespace {

CycleConfig tiny(std::uint64_t seed) {
  CycleConfig c;
  c.cycles = 2;
  c.collect_random = 200;
  c.collect_proposer = 100;
  c.architecture.trunk_hidden = {16};
  c.architecture.head_hidden = {16};
  c.predictor.epochs = 3;
  c.proposer.epochs = 2;
  c.proposer.iterations_per_epoch = 5;
  c.grid_side = 4;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("episode rounding") {
  CHECK(episodes_for(0, 5) == 0);
  CHECK(episodes_for(1, 5) == 1);
  CHECK(episodes_for(10, 5) == 2);
  CHECK(episodes_for(11, 5) == 3);
  CHECK(episodes_for(6667, 1) == 6667);
}

TEST_CASE("collection counts and provenance") {
  env::LocoTask loco;
  CHECK(collect_transitions(loco, nullptr, 0, 0.1, 1).empty());
  const auto rand = collect_transitions(loco, nullptr, 100, 0.1, 1);
  CHECK(rand.size() == 500);
  for (const auto& t : rand) {
    CHECK(t.provenance == predictor::Provenance::random);
    CHECK(loco.action_box().contains(t.a.cast<double>(), 1e-6));
  }
  Rng rng(2);
  const auto net = proposer::make_proposer(loco, predictor::Architecture{}, 2, rng);
  const auto prop = collect_transitions(loco, &net, 10, 0.1, 1);
  CHECK(prop.size() == 50);
  for (const auto& t : prop) CHECK(t.provenance == predictor::Provenance::proposer);
}

TEST_CASE("zero exploration noise records the proposer's actions") {
  env::ReacherTask task;
  Rng rng(3);
  auto net = proposer::make_proposer(task, predictor::Architecture{}, 2, rng);
  // cut the affordance inputs so the recorded action is predictable without knowing omega
  {
    auto& head = net.head();
    const auto& l = head.layers()[0];
    auto p = head.mutable_params();
    for (std::size_t r = 0; r < l.out_dim; ++r) {
      for (std::size_t c = l.in_dim - 2; c < l.in_dim; ++c) p[head.param_offset(0) + r * l.in_dim + c] = 0.0f;
    }
  }
  const auto records = collect_transitions(task, &net, 50, 0.0, 4);
  REQUIRE(records.size() == 50);
  for (const auto& t : records) {
    const Eigen::VectorXd expected = proposer::propose(net, t.s.cast<double>(), Eigen::Vector2d::Zero());
    CHECK(t.a == expected.cast<float>());
  }
  const auto noisy = collect_transitions(task, &net, 50, 0.1, 4);
  CHECK(noisy[0].a != records[0].a);
}

TEST_CASE("collection is independent of the worker count") {
  env::ReacherTask task;
  const auto one = collect_transitions(task, nullptr, 64, 0.1, 9, 1);
  const auto four = collect_transitions(task, nullptr, 64, 0.1, 9, 4);
  REQUIRE(one.size() == four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].s == four[i].s);
    CHECK(one[i].a == four[i].a);
    CHECK(one[i].s_next == four[i].s_next);
  }
}

TEST_CASE("config validation") {
  CycleConfig c = tiny(1);
  CHECK_NOTHROW(c.validate());
  c.collect_random = 0;
  c.collect_proposer = 0;
  CHECK_THROWS(c.validate());
  c = tiny(1);
  c.sigma_explore = -1;
  CHECK_THROWS(c.validate());
  c = tiny(1);
  c.cycles = 0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("cycles grow the dataset with tagged records and reproduce exactly") {
  env::LocoTask task;
  const CycleConfig cfg = tiny(11);
  std::ostringstream progress;
  const auto a = run_cycles(task, cfg, &progress);
  REQUIRE(a.report.cycles.size() == 2);
  const auto& c0 = a.report.cycles[0];
  const auto& c1 = a.report.cycles[1];
  CHECK(c0.random_records == 200);
  CHECK(c0.proposer_records == 100);
  CHECK(c0.dataset_size == 300);
  CHECK(c1.dataset_size == 600);
  CHECK(c1.dataset_size > c0.dataset_size);
  CHECK(a.dataset.count(predictor::Provenance::random) == 400);
  CHECK(a.dataset.count(predictor::Provenance::proposer) == 200);
  CHECK(a.report.reachable_area > 0);
  CHECK(progress.str().find("phase=collect cycle=0") != std::string::npos);
  CHECK(progress.str().find("phase=evaluate cycle=1") != std::string::npos);

  auto cfg4 = cfg;
  cfg4.workers = 3;
  const auto b = run_cycles(task, cfg4);
  CHECK(a.report.to_json() == b.report.to_json());
  CHECK(a.predictor.net.params() == b.predictor.net.params());
  CHECK(a.proposer.params() == b.proposer.params());
  CHECK(a.report.to_json(true).contains("cycles"));
}

TEST_CASE("offline training: one cycle, random data only") {
  env::LocoTask task;
  CycleConfig cfg = tiny(12);
  cfg.cycles = 1;
  cfg.collect_proposer = 0;
  const auto r = run_cycles(task, cfg);
  CHECK(r.dataset.count(predictor::Provenance::proposer) == 0);
  CHECK(r.dataset.size() == 200);
}

TEST_CASE("the validation split never feeds training batches") {
  env::LocoTask task;
  CycleConfig cfg = tiny(13);
  cfg.cycles = 1;
  const auto r = run_cycles(task, cfg);
  const auto train = r.dataset.training_indices();
  const auto val = r.dataset.validation_indices();
  CHECK(train.size() + val.size() == r.dataset.size());
  for (std::size_t i : val) CHECK(r.dataset.is_validation(i));
  for (std::size_t i : train) CHECK_FALSE(r.dataset.is_validation(i));
}
