#include <doctest.h>

#include <cmath>
#include <random>

#include "pal/controller/buffers.hpp"
#include "pal/controller/manager.hpp"
#include "pal/controller/selection.hpp"
#include "pal/core/errors.hpp"
#include "support/support.hpp"

using namespace pal;

namespace {

// Two-pass sample std in long double, one dimension at a time.
std::vector<long double> brute_std(const std::vector<Sample>& members) {
  const std::size_t dim = members.front().dim();
  std::vector<long double> out(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    long double sum = 0;
    for (const auto& m : members) sum += m[d];
    const long double mean = sum / members.size();
    long double ss = 0;
    for (const auto& m : members) ss += (m[d] - mean) * (m[d] - mean);
    out[d] = std::sqrt(ss / (members.size() - 1));
  }
  return out;
}

CommitteeBatch batch_of(std::vector<std::vector<Sample>> per_item) { return CommitteeBatch{std::move(per_item)}; }

}  // namespace

TEST_CASE("committee std examples") {
  CHECK(committee_std({Sample{1.0}, Sample{1.0}, Sample{1.0}, Sample{1.0}})[0] == 0.0);
  CHECK(committee_std({Sample{1.0}, Sample{3.0}})[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(committee_std({Sample{1.0}}), ConfigError);
  CHECK(committee_mean({Sample{1.0, 2.0}, Sample{3.0, 6.0}}) == Sample{2.0, 4.0});
}

TEST_CASE("prediction_check examples") {
  const std::vector<Sample> inputs{Sample{10.0}, Sample{20.0}};
  SUBCASE("identical committee selects nothing") {
    const auto d = prediction_check(inputs, batch_of({{Sample{1.0}, Sample{1.0}, Sample{1.0}, Sample{1.0}},
                                                      {Sample{5.0}, Sample{5.0}, Sample{5.0}, Sample{5.0}}}),
                                    0.0);
    CHECK(d.to_oracle.empty());
    CHECK(d.to_generators == std::vector<Sample>{Sample{1.0}, Sample{5.0}});
  }
  SUBCASE("two-point disagreement above the threshold") {
    const auto d = prediction_check(inputs, batch_of({{Sample{1.0}, Sample{3.0}}, {Sample{2.0}, Sample{2.5}}}), 1.0);
    CHECK(d.to_oracle == std::vector<Sample>{Sample{10.0}});
    CHECK(d.to_generators[0].all_zero());
    CHECK(d.to_generators[1] == Sample{2.25});
  }
  SUBCASE("one noisy dimension is enough") {
    const auto d = prediction_check({Sample{1.0, 1.0}},
                                    batch_of({{Sample{0.0, 0.0}, Sample{0.0, 5.0}, Sample{0.0, 0.0}}}), 1.0);
    CHECK(d.to_oracle.size() == 1);
  }
  CHECK_THROWS_AS(prediction_check({Sample{1.0}}, batch_of({{Sample{1.0}}}), 0.0), ConfigError);
}

TEST_CASE("selection matches a brute-force committee std on 500 batches") {
  int selected = 0, kept = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t gens = 1 + rng() % 20, members = 2 + rng() % 4, dim = 1 + rng() % 5;
    const double threshold = std::uniform_real_distribution<double>(0.0, 1.5)(rng);
    std::vector<Sample> inputs;
    std::vector<std::vector<Sample>> per_item;
    for (std::size_t g = 0; g < gens; ++g) {
      inputs.push_back(test::random_sample(rng, 4));
      const double spread = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
      auto centre = test::random_sample(rng, dim);
      std::vector<Sample> preds;
      for (std::size_t m = 0; m < members; ++m) {
        auto noise = test::random_sample(rng, dim);
        std::vector<double> v(dim);
        for (std::size_t d = 0; d < dim; ++d) v[d] = centre[d] + spread * noise[d];
        preds.emplace_back(std::move(v));
      }
      per_item.push_back(std::move(preds));
    }
    const auto decision = prediction_check(inputs, batch_of(per_item), threshold);

    std::vector<Sample> want;
    for (std::size_t g = 0; g < gens; ++g) {
      const auto ref = brute_std(per_item[g]);
      const auto got = committee_std(per_item[g]);
      bool pick = false;
      for (std::size_t d = 0; d < dim; ++d) {
        CHECK(static_cast<long double>(got[d]) == doctest::Approx(static_cast<double>(ref[d])).epsilon(1e-12));
        REQUIRE(std::fabs(static_cast<double>(ref[d]) - threshold) > 1e-9);
        pick = pick || ref[d] > threshold;
      }
      if (pick) {
        want.push_back(inputs[g]);
        CHECK(decision.to_generators[g].all_zero());
      } else {
        CHECK(decision.to_generators[g] == committee_mean(per_item[g]));
      }
    }
    CHECK(decision.to_oracle == want);
    selected += static_cast<int>(want.size());
    kept += static_cast<int>(gens - want.size());
  }
  // Both branches were exercised.
  CHECK(selected > 100);
  CHECK(kept > 100);
}

TEST_CASE("decision validation") {
  const std::vector<Sample> inputs{Sample{1.0}, Sample{2.0}};
  CHECK_NOTHROW(validate_decision({{Sample{2.0}}, {Sample{0.0}, Sample{0.0}}}, inputs));
  CHECK_THROWS_AS(validate_decision({{}, {Sample{0.0}}}, inputs), ProtocolError);
  CHECK_THROWS_AS(validate_decision({{Sample{3.0}}, {Sample{0.0}, Sample{0.0}}}, inputs), ProtocolError);
  CHECK(dedup_bit_exact({Sample{1.0}, Sample{2.0}, Sample{1.0}, Sample{-0.0}, Sample{0.0}}) ==
        std::vector<Sample>{Sample{1.0}, Sample{2.0}, Sample{-0.0}, Sample{0.0}});
  CHECK_NOTHROW(validate_adjust_order({2, 0}, 3));
  CHECK_THROWS_AS(validate_adjust_order({0, 0}, 3), ProtocolError);
  CHECK_THROWS_AS(validate_adjust_order({3}, 3), ProtocolError);
}

TEST_CASE("buffer adjustment") {
  const std::vector<Sample> entries{Sample{1.0}, Sample{2.0}, Sample{3.0}};
  // Two-member committees with |a - b| = std * sqrt(2).
  auto member_pair = [](double s) { return std::vector<Sample>{Sample{0.0}, Sample{s * std::sqrt(2.0)}}; };

  SUBCASE("sorted by mean std, largest first") {
    const auto fresh = batch_of({member_pair(0.5), member_pair(2.0), member_pair(1.0)});
    CHECK(adjust_order(entries, fresh, 0.4) == std::vector<std::size_t>{1, 2, 0});
    CHECK(adjust_oracle_buffer(entries, fresh, 0.4) == std::vector<Sample>{Sample{2.0}, Sample{3.0}, Sample{1.0}});
  }
  SUBCASE("everything below the threshold is pruned") {
    const auto fresh = batch_of({member_pair(0.1), member_pair(0.2), member_pair(0.3)});
    CHECK(adjust_oracle_buffer(entries, fresh, 0.4).empty());
  }
  SUBCASE("ties keep buffer order") {
    const auto fresh = batch_of({member_pair(1.0), member_pair(1.0), member_pair(2.0)});
    CHECK(adjust_order(entries, fresh, 0.0) == std::vector<std::size_t>{2, 0, 1});
  }
}

TEST_CASE("oracle buffer") {
  OracleInputBuffer buf(3);
  const auto a = buf.push(Sample{1.0});
  const auto b = buf.push(Sample{2.0});
  const auto c = buf.push(Sample{3.0});
  CHECK(buf.free() == 0);
  CHECK_THROWS_AS(buf.push(Sample{4.0}), std::length_error);
  CHECK(buf.pop_front()->id == a);

  // Snapshot {b, c}; d arrives meanwhile; the adjustment keeps only c.
  const auto d = buf.push(Sample{4.0});
  CHECK(buf.apply_adjustment({b, c}, {c}) == 1);
  REQUIRE(buf.size() == 2);
  CHECK(buf.entries()[0].id == c);
  CHECK(buf.entries()[1].id == d);

  // Entries dispatched since the snapshot are not resurrected.
  buf.pop_front();
  CHECK(buf.apply_adjustment({c, d}, {c, d}) == 0);
  REQUIRE(buf.size() == 1);
  CHECK(buf.entries()[0].id == d);
}

TEST_CASE("training buffer flushes exactly at the threshold") {
  TrainingDataBuffer buf(20);
  for (int round = 0; round < 3; ++round) {
    for (int i = 0; i < 19; ++i) {
      CHECK_FALSE(buf.add({Sample{double(i)}, Sample{0.0}}).has_value());
      CHECK(buf.size() < 20);
    }
    const auto batch = buf.add({Sample{19.0}, Sample{0.0}});
    REQUIRE(batch.has_value());
    CHECK(batch->size() == 20);
    CHECK(batch->front().input == Sample{0.0});
    CHECK(batch->back().input == Sample{19.0});
    CHECK(buf.size() == 0);
  }
}

TEST_CASE("manager dispatches FIFO to the first idle oracle") {
  test::TempDir dir;
  auto cfg = test::small_config(dir.path());
  cfg.retrain_size = 2;
  ManagerState m(cfg, {});
  m.enqueue({Sample{1.0}, Sample{2.0}, Sample{3.0}});
  auto first = m.dispatch();
  REQUIRE(first.size() == 2);
  CHECK(first[0].task.input == Sample{1.0});
  CHECK(first[1].task.input == Sample{2.0});
  CHECK(m.dispatch().empty());
  CHECK(m.in_flight() == 2);

  CHECK_FALSE(m.on_label(first[1].oracle, first[1].task.id, {Sample{2.0}, Sample{-2.0}}).has_value());
  auto next = m.dispatch();
  REQUIRE(next.size() == 1);
  CHECK(next[0].oracle == first[1].oracle);
  CHECK(next[0].task.input == Sample{3.0});

  CHECK_THROWS_AS(m.on_label(first[0].oracle, 999, {Sample{1.0}, Sample{-1.0}}), ProtocolError);
  const auto batch = m.on_label(first[0].oracle, first[0].task.id, {Sample{1.0}, Sample{-1.0}});
  REQUIRE(batch.has_value());
  CHECK(batch->size() == 2);
  CHECK(m.counters().flushes == 1);
  CHECK(m.counters().labeled == 2);
}

TEST_CASE("manager adjusts only after every trainer finished a round") {
  test::TempDir dir;
  auto cfg = test::small_config(dir.path());
  cfg.orcl_workers = 1;
  cfg.dynamic_oracle_list = true;
  ManagerState m(cfg, [](const std::vector<Sample>& entries, const CommitteeBatch& fresh) {
    return adjust_order(entries, fresh, 0.5);
  });
  m.enqueue({Sample{1.0}, Sample{2.0}, Sample{3.0}});
  m.dispatch();  // the only oracle takes 1.0

  CHECK_FALSE(m.on_retrain_done(0).has_value());
  const auto snap = m.on_retrain_done(1);
  REQUIRE(snap.has_value());
  CHECK(snap->inputs == std::vector<Sample>{Sample{2.0}, Sample{3.0}});
  CHECK(m.adjust_outstanding());
  CHECK_FALSE(m.on_retrain_done(0).has_value());

  // Trainer 0 and 1 disagree strongly on 3.0 only.
  CHECK_FALSE(m.on_adjust_response(0, {Sample{0.0}, Sample{0.0}}));
  CHECK(m.on_adjust_response(1, {Sample{0.1}, Sample{5.0}}));
  REQUIRE(m.oracle_buffer().size() == 1);
  CHECK(m.oracle_buffer().entries()[0].input == Sample{3.0});
  CHECK(m.counters().pruned == 1);
  CHECK(m.counters().adjustments == 1);
}
