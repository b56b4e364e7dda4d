#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "blend/payments.hpp"
#include "test_support.hpp"

using namespace blend;
using testing::make_instance;

TEST_CASE("GSP next-eCPM prices") {
  const auto in = make_instance({{2.0, "a", 0.1}, {1.0, "a", 0.1}}, {{"o", 0.1}}, {0, 1}, {});
  const auto t = blend::make_tuple(in.imp, std::vector<std::size_t>{0, 1});
  const auto pay = gsp_payments(in.imp, t, {0.1, 0.1, 0.1}, 1.0, 0.0);
  REQUIRE(pay.ads.size() == 2);
  CHECK(*pay.ads[0].price_per_click == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(*pay.ads[1].price_per_click == 0.0);
  CHECK(pay.ads[0].expected_payment == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(pay.expected_payment_of("a0") == pay.ads[0].expected_payment);
  CHECK(pay.expected_payment_of("nobody") == 0.0);
}

TEST_CASE("GSP ranks the shown ads by weighted eCPM") {
  // Shown in the order (a1, a0) but a0 has the higher eCPM.
  const auto in = make_instance({{2.0, "a", 0.1}, {1.0, "a", 0.1}}, {{"o", 0.1}}, {0, 1}, {});
  const auto t = blend::make_tuple(in.imp, std::vector<std::size_t>{1, 0});
  const auto pay = gsp_payments(in.imp, t, {0.1, 0.1, 0.1}, 1.0, 0.25);
  CHECK(*pay.find("a0")->price_per_click == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(*pay.find("a1")->price_per_click == 0.25);
}

TEST_CASE("GSP single ad pays the floor") {
  const auto in = make_instance({{2.0, "a", 0.1}}, {{"o", 0.1}}, {0}, {});
  const auto pay = gsp_payments(in.imp, generate_tuples(in.imp, 1)[0], {0.1, 0.1}, 1.0, 0.3);
  CHECK(*pay.ads[0].price_per_click == 0.3);
  CHECK_THROWS_AS(gsp_payments(in.imp, generate_tuples(in.imp, 1)[0], {0.1, 0.1}, -1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(gsp_payments(in.imp, generate_tuples(in.imp, 1)[0], {0.1, 0.1}, 1.0, -0.1), InvalidArgument);
}

TEST_CASE("GSP price never exceeds the bid") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> tdist(0.0, 2.0);
  for (int i = 0; i < 500; ++i) {
    const auto in = testing::random_instance(rng, 6, 0.6, 1.4);
    const double t = tdist(rng);
    const auto r = optimize_impression(in.imp, ListwisePredictor(in.model), VirtualBid{1.0, {}}, in.imp.ads.size());
    const auto pay = gsp_payments(in.imp, r.chosen, predict_pointwise(*in.model, in.imp, r.chosen), t, 0.0);
    for (const auto& p : pay.ads) CHECK(*p.price_per_click <= in.imp.ads[p.candidate_index].bid_cpc);
  }
}

TEST_CASE("GSP agrees across models without interactions") {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 100; ++i) {
    const auto in = testing::random_instance(rng, 6, 1.0, 1.0);
    const auto t = generate_tuples(in.imp, in.imp.ads.size()).back();
    const auto a = gsp_payments(in.imp, t, predict_pointwise(*in.model, in.imp, t), 1.0, 0.0);
    const auto b = gsp_payments(in.imp, t, predict_listwise(*in.model, in.imp, t), 1.0, 0.0);
    for (std::size_t k = 0; k < a.ads.size(); ++k) CHECK(*a.ads[k].price_per_click == *b.ads[k].price_per_click);
  }
}

TEST_CASE("VCG single slot equals the runner-up eCPM") {
  const auto in = make_instance({{2.0, "a", 0.1}, {3.0, "b", 0.05}}, {{"o", 0.1}}, {0}, {}, InteractionConfig{});
  const auto pay = vcg_payments(in.imp, ListwisePredictor(in.model), VirtualBid{0.0, {}}, 2);
  REQUIRE(pay.ads.size() == 1);
  CHECK(pay.ads[0].ad_id == "a0");
  CHECK(std::abs(pay.ads[0].expected_payment - 0.15) <= 1e-12);
  CHECK(*pay.ads[0].price_per_click == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(pay.expected_payment_of("a1") == 0.0);
}

TEST_CASE("VCG sole bidder pays nothing") {
  const auto in = make_instance({{2.0, "a", 0.1}}, {{"o", 0.1}}, {0}, {});
  const auto pay = vcg_payments(in.imp, ListwisePredictor(in.model), VirtualBid{0.0, {}}, 1);
  CHECK(pay.ads[0].expected_payment == 0.0);
}

TEST_CASE("VCG zero CTR leaves the per-click price undefined") {
  const auto in = make_instance({{2.0, "a", 0.0}, {1.0, "a", 0.0}}, {{"o", 0.1}}, {0}, {});
  const auto pay = vcg_payments(in.imp, ListwisePredictor(in.model), VirtualBid{0.0, {}}, 2);
  CHECK_FALSE(pay.ads[0].price_per_click.has_value());
}

TEST_CASE("VCG matches a brute-force welfare oracle") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> vdist(0.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const auto in = testing::random_instance(rng, 6, 0.6, 1.4);
    const double v = vdist(rng);
    const auto alloc = optimize_impression(in.imp, ListwisePredictor(in.model), VirtualBid{v, {}}, in.imp.ads.size());
    const auto pay = vcg_payments(in.imp, ListwisePredictor(in.model), VirtualBid{v, {}}, in.imp.ads.size(), alloc);
    for (const auto& p : pay.ads) {
      std::vector<int> others;
      for (int c = 0; c < static_cast<int>(in.imp.ads.size()); ++c) {
        if (c != static_cast<int>(p.candidate_index)) others.push_back(c);
      }
      const double own = in.imp.ads[p.candidate_index].bid_cpc * p.pctr;
      const double expect = testing::oracle_best_welfare(in, v, others) - (alloc.objective_value - own);
      CHECK(std::abs(p.unreserved_payment - expect) <= 1e-12);
      CHECK(p.expected_payment == std::max(0.0, p.unreserved_payment));
    }
  }
}

TEST_CASE("VCG bounds without a virtual bid or interactions") {
  std::mt19937_64 rng(34);
  for (int i = 0; i < 300; ++i) {
    const auto in = testing::random_instance(rng, 6, 1.0, 1.0);
    const auto pay = vcg_payments(in.imp, ListwisePredictor(in.model), VirtualBid{0.0, {}}, in.imp.ads.size());
    for (const auto& p : pay.ads) {
      CHECK(p.unreserved_payment >= -1e-12);
      CHECK(p.unreserved_payment <= in.imp.ads[p.candidate_index].bid_cpc * p.pctr + 1e-12);
    }
  }
}

TEST_CASE("payment scheme names") {
  CHECK(payment_scheme_from_string("gsp") == PaymentScheme::kGsp);
  CHECK(payment_scheme_from_string("vcg") == PaymentScheme::kVcg);
  CHECK_THROWS_AS(payment_scheme_from_string("first-price"), InvalidArgument);
}
