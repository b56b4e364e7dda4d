#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

using namespace blend;
using testing::make_instance;

TEST_CASE("independence returns base CTRs") {
  const auto in = make_instance({{1.0, "a", 0.11}, {1.0, "b", 0.07}}, {{"a", 0.2}, {"c", 0.3}, {"a", 0.05}, {"b", 0.4}},
                                {1, 4}, {}, InteractionConfig{1.0, 1.0, {}});
  for (const auto& t : generate_tuples(in.imp, 2)) {
    const auto x = predict_listwise(*in.model, in.imp, t);
    for (std::size_t p = 0; p < x.size(); ++p) {
      const Slot& s = t.slots[p];
      const std::string& id = s.kind == SlotKind::kAd ? in.imp.ads[s.index].ad_id : in.imp.organics[s.index].item_id;
      CHECK(x[p] == in.model->base_ctr().at(id));
    }
  }
}

TEST_CASE("two same-subcategory ads with factor 0.9") {
  const auto in = make_instance({{1.0, "s", 0.10}, {1.0, "s", 0.10}}, {}, {0, 1}, {1.0, 1.0},
                                InteractionConfig{0.9, 1.0, {}});
  const auto x = predict_listwise(*in.model, in.imp, generate_tuples(in.imp, 2)[0]);
  CHECK(x[0] == doctest::Approx(0.09).epsilon(1e-15));
  CHECK(x[1] == doctest::Approx(0.09).epsilon(1e-15));
}

TEST_CASE("complementary neighbours clamp at one") {
  const auto in = make_instance({{1.0, "s", 0.9}}, {{"s", 0.1}, {"s", 0.1}, {"s", 0.1}}, {0}, {1.0, 1.0, 1.0, 1.0},
                                InteractionConfig{1.3, 1.0, {}});
  const auto x = predict_listwise(*in.model, in.imp, generate_tuples(in.imp, 1)[0]);
  CHECK(x[0] == 1.0);
  // 0.1 * 1.3^3 stays below one.
  CHECK(x[1] == doctest::Approx(0.1 * 1.3 * 1.3 * 1.3).epsilon(1e-14));
}

TEST_CASE("pointwise is the product of base and multiplier") {
  const auto in = make_instance({{1.0, "s", 0.2}}, {{"s", 0.1}}, {0}, {0.5, 1.0}, InteractionConfig{0.3, 2.0, {}});
  const auto t = generate_tuples(in.imp, 1)[0];
  CHECK(predict_pointwise(*in.model, in.imp, t)[0] == doctest::Approx(0.10).epsilon(1e-15));
  const auto flat = in.model->without_interactions();
  CHECK(predict_pointwise(*in.model, in.imp, t) == predict_listwise(flat, in.imp, t));
}

TEST_CASE("pointwise ignores order on equal multipliers") {
  const auto in = make_instance({{1.0, "a", 0.2}, {1.0, "b", 0.3}, {1.0, "a", 0.05}}, {{"b", 0.1}, {"a", 0.1}},
                                {0, 1, 2}, {1.0, 1.0, 1.0, 0.5, 0.5}, InteractionConfig{0.5, 1.5, {}});
  for (const auto& t : generate_tuples(in.imp, 3)) {
    const auto x = predict_pointwise(*in.model, in.imp, t);
    for (std::size_t p = 0; p < 3; ++p) CHECK(x[p] == in.model->base_ctr().at(in.imp.ads[t.slots[p].index].ad_id));
  }
}

TEST_CASE("listwise matches the product formula and stays in [0, 1]") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto in = testing::random_instance(rng, 6, 0.5, 2.5);
    const auto tuples = generate_tuples(in.imp, in.imp.ads.size());
    const auto all = in.model->predict_listwise_all(in.imp, tuples);
    std::size_t checked = 0;
    testing::oracle_pages(in, testing::all_ads(in), [&](const testing::Page& page) {
      // Locate the same page among the generated tuples.
      for (std::size_t t = 0; t < tuples.size(); ++t) {
        bool same = true;
        for (std::size_t p = 0; p < page.ad.size() && same; ++p) {
          if (page.ad[p] >= 0) same = tuples[t].slots[p] == Slot{SlotKind::kAd, static_cast<std::size_t>(page.ad[p])};
        }
        if (!same) continue;
        const auto expect = testing::oracle_ctrs(in, page);
        for (std::size_t p = 0; p < expect.size(); ++p) {
          CHECK(all[t][p] == doctest::Approx(expect[p]).epsilon(1e-14));
          CHECK(all[t][p] >= 0.0);
          CHECK(all[t][p] <= 1.0);
        }
        ++checked;
      }
    });
    CHECK(checked == tuples.size());
  }
}

TEST_CASE("unit factors make listwise and pointwise agree") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 100; ++i) {
    auto in = testing::random_instance(rng, 6, 1.0, 1.0);
    const auto tuples = generate_tuples(in.imp, in.imp.ads.size());
    CHECK(in.model->predict_listwise_all(in.imp, tuples) == in.model->predict_pointwise_all(in.imp, tuples));
  }
}

TEST_CASE("own prediction ignores the order of the other slots") {
  // Equal multipliers everywhere, so only the neighbour set matters.
  const auto in = make_instance({{1.0, "a", 0.2}, {1.0, "b", 0.3}, {1.0, "c", 0.1}}, {{"a", 0.1}, {"b", 0.2}, {"c", 0.3}},
                                {0, 1, 2}, {}, InteractionConfig{0.7, 1.2, {{{"a", "b"}, 0.4}}});
  const auto t1 = blend::make_tuple(in.imp, std::vector<std::size_t>{0, 1, 2});
  const auto t2 = blend::make_tuple(in.imp, std::vector<std::size_t>{0, 2, 1});
  CHECK(predict_listwise(*in.model, in.imp, t1)[0] == predict_listwise(*in.model, in.imp, t2)[0]);
}

TEST_CASE("override factors are directional") {
  InteractionConfig ic{1.0, 1.0, {{{"a", "b"}, 0.5}}};
  CHECK(ic.factor("a", "b") == 0.5);
  CHECK(ic.factor("b", "a") == 1.0);
}

TEST_CASE("model configuration errors") {
  CHECK_THROWS_AS(SyntheticJointModel({{"x", 1.5}}, {1.0}, {}), ConfigError);
  CHECK_THROWS_AS(SyntheticJointModel({{"x", 0.5}}, {-1.0}, {}), ConfigError);
  CHECK_THROWS_AS(SyntheticJointModel({{"x", 0.5}}, {1.0}, InteractionConfig{0.0, 1.0, {}}), ConfigError);
  const SyntheticJointModel m({{"x", 0.5}}, {1.0}, {});
  CHECK_THROWS_AS(m.base_ctr_of("y"), ConfigError);

  const auto in = make_instance({{1.0, "s", 0.2}}, {{"s", 0.1}}, {0}, {1.0, 1.0});
  const SyntheticJointModel short_mult(in.model->base_ctr(), {1.0}, {});
  CHECK_THROWS_AS(predict_listwise(short_mult, in.imp, generate_tuples(in.imp, 1)[0]), ConfigError);
}
