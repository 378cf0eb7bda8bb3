#include <doctest.h>

#include <cmath>

#include "uavad/error.hpp"
#include "uavad/evaluation.hpp"
#include "uavad/nn/rng.hpp"

using namespace uavad;

namespace {

GridTensor random_grid(nn::Rng& rng, double p) {
  GridTensor g(GridSpec::default_spec());
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) {
      for (int k = 0; k < kNumCategories; ++k) {
        if (rng.uniform() < p) g.set(r, c, category_from_id(k));
      }
    }
  }
  return g;
}

AnomalyReport report_with(std::vector<FlaggedCell> cells) {
  AnomalyReport r;
  r.anomalies = std::move(cells);
  return r;
}

}  // namespace

TEST_CASE("reconstruction counts") {
  GridTensor x(GridSpec::default_spec());
  x.set(0, 0, Category::car);
  x.set(3, 3, Category::bus);
  x.set(9, 1, Category::van);
  CHECK(reconstruction_counts(x, x) == MetricCounts{3, 0, 0, 2045});
  GridTensor two(GridSpec::default_spec());
  two.set(1, 1, Category::car);
  two.set(2, 1, Category::car);
  CHECK(reconstruction_counts(two, GridTensor(GridSpec::default_spec())).fn == 2);

  nn::Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_grid(rng, 0.1);
    const auto b = random_grid(rng, 0.1);
    MetricCounts expect;
    for (int r = 0; r < 16; ++r) {
      for (int c = 0; c < 16; ++c) {
        for (int k = 0; k < kNumCategories; ++k) {
          const bool ia = a.at(r, c, category_from_id(k));
          const bool ib = b.at(r, c, category_from_id(k));
          if (ia && ib) ++expect.tp;
          if (!ia && ib) ++expect.fp;
          if (ia && !ib) ++expect.fn;
          if (!ia && !ib) ++expect.tn;
        }
      }
    }
    CHECK(reconstruction_counts(a, b) == expect);
  }
}

TEST_CASE("precision recall f1") {
  const auto s = prf1({3, 1, 1, 0});
  CHECK(s.precision == 0.75);
  CHECK(s.recall == 0.75);
  CHECK(s.f1 == doctest::Approx(0.75));
  const auto e = prf1({0, 0, 0, 100});
  CHECK(e.precision == 1.0);
  CHECK(e.recall == 1.0);
  CHECK(e.f1 == 1.0);
  const auto z = prf1({0, 2, 3, 0});
  CHECK(z.f1 == 0.0);
}

TEST_CASE("anomaly accuracy") {
  const std::vector<AnomalyCase> cases{{AnomalyTask::task1_private, {1, 2, Category::car}, 0, 0},
                                       {AnomalyTask::task1_private, {4, 4, Category::bus}, 1, 0}};
  const std::vector<AnomalyReport> all{report_with({{Category::car, 1, 2, 0.1}}),
                                       report_with({{Category::bus, 4, 4, 0.2}})};
  CHECK(anomaly_accuracy(all, cases) == 1.0);
  const std::vector<AnomalyReport> none{report_with({{Category::van, 1, 2, 0.1}}), report_with({})};
  CHECK(anomaly_accuracy(none, cases) == 0.0);
  const std::vector<AnomalyReport> half{report_with({{Category::car, 1, 2, 0.1}}), report_with({})};
  CHECK(anomaly_accuracy(half, cases) == 0.5);
  CHECK_THROWS_AS((void)anomaly_accuracy(std::span(all).first(1), cases), ShapeError);
}

TEST_CASE("mse") {
  const std::vector<double> x{1, 0};
  CHECK(mse(x, x) == 0.0);
  CHECK(mse(x, std::vector<double>{0, 1}) == 1.0);
  CHECK(mse(x, std::vector<double>{0.5, 0.5}) == 0.25);
  CHECK_THROWS_AS((void)mse(x, std::vector<double>{1}), ShapeError);
}

TEST_CASE("benchmark runner shape and determinism") {
  const auto world = load_world(UAVAD_WORLD);
  const auto data = generate_dataset(world, 40, 2);
  std::map<AnomalyTask, std::vector<BenchmarkRecord>> bench;
  for (const auto t : kAllTasks) bench[t] = build_benchmark(world, data.test, t, 5).records;

  std::vector<Model> models;
  nn::Rng rng(6);
  // reverse order on input; the result follows the canonical order
  for (auto it = kAllVariants.rbegin(); it != kAllVariants.rend(); ++it) {
    models.push_back(init_model(ModelConfig::for_variant(*it), {56.17, 10.19, 1e4}, rng));
  }
  const auto r = run_benchmark(world, data, models, bench);
  REQUIRE(r.variants.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(r.variants[i].first == kAllVariants[i]);
    CHECK(r.variants[i].second.task_accuracy.size() == 3);
    CHECK(r.variants[i].second.counts.total() == data.test.size() * 2048);
  }
  CHECK(r.task_cases.at(AnomalyTask::task2_public) == bench.at(AnomalyTask::task2_public).size());
  const auto again = run_benchmark(world, data, models, bench);
  CHECK(to_json(r) == to_json(again));
  CHECK(to_json(r).at("variants").at("uav_adnet").contains("task3_acc"));

  const auto table = format_table(r);
  CHECK(table.find("uav_adnet ") < table.find("uav_adnet_wo_gps"));
  CHECK(table.find("uav_adnet_wo_gps") < table.find("cvae"));
  CHECK(table.find("cvae") < table.find("vae "));

  std::vector<Model> dup{models[0], models[0]};
  CHECK_THROWS_AS((void)run_benchmark(world, data, dup, bench), ConfigError);
}

TEST_CASE("gps override") {
  const auto world = load_world(UAVAD_WORLD);
  const auto data = generate_dataset(world, 40, 2);
  nn::Rng rng(6);
  const auto vae = init_model(ModelConfig::for_variant(Variant::vae), {}, rng);
  std::vector<GpsLabel> shifted;
  for (std::size_t i = 0; i < data.test.size(); ++i) shifted.push_back(*data.test[(i + 1) % data.test.size()].gps);
  const auto a = evaluate_reconstruction(vae, data.test);
  const auto b = evaluate_reconstruction(vae, data.test, 0.5, shifted);
  CHECK(a.counts == b.counts);
  CHECK(a.mse == b.mse);
  CHECK_THROWS_AS((void)evaluate_reconstruction(vae, data.test, 0.5, std::span(shifted).first(2)), ShapeError);
}
