#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "blend/parallel.hpp"
#include "blend/simharness.hpp"

namespace blend::sim {

using nlohmann::json;
using nlohmann::ordered_json;

PositionLayout SimConfig::layout() const { return PositionLayout::with_ads_at(ad_positions, total_slots); }

void SimConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(std::string("sim config: ") + what);
  };
  require(n_impressions >= 1, "n_impressions must be >= 1");
  require(total_slots >= 1, "total_slots must be >= 1");
  require(ad_positions.size() >= 1 && ad_positions.size() <= total_slots, "need 1..total_slots ad positions");
  (void)layout();  // throws on overlapping or out-of-range positions
  require(n_ads >= k_ads(), "n_ads must be >= K_ads");
  require(n_organics >= k_orgs(), "n_organics must be >= K_orgs");
  require(n_prime >= k_ads() && n_prime <= n_ads, "n_prime must lie in [K_ads, n_ads]");
  require(n_subcategories >= 1, "n_subcategories must be >= 1");
  require(ad_catalog_size >= n_ads, "ad catalog smaller than n_ads");
  require(organic_catalog_size >= n_organics, "organic catalog smaller than n_organics");
  require(ad_same_subcategory_share >= 0.0 && ad_same_subcategory_share <= 1.0, "ad share outside [0,1]");
  require(organic_same_subcategory_share >= 0.0 && organic_same_subcategory_share <= 1.0,
          "organic share outside [0,1]");
  require(bid.log_sd >= 0.0 && bid.subcategory_log_sd >= 0.0 && bid.scale > 0.0, "bad bid distribution");
  require(ctr.ad_log_sd >= 0.0 && ctr.organic_log_sd >= 0.0 && ctr.scale > 0.0, "bad CTR distribution");
  require(position_multipliers.size() >= total_slots, "position_multipliers shorter than total_slots");
  require(interaction.default_same > 0.0 && interaction.default_cross > 0.0, "interaction factors must be > 0");
  require(gsp_exponent >= 0.0, "gsp_exponent must be >= 0");
  require(floor >= 0.0, "floor must be >= 0");
  require(tuning.impressions >= 1, "tuning.impressions must be >= 1");
  require(tuning.bracket_lo >= 0.0, "tuning bracket must start at >= 0");
  require(tuning.bracket_hi < 0.0 || tuning.bracket_hi >= tuning.bracket_lo, "tuning bracket reversed");
  require(tuning.tol > 0.0 && tuning.max_iter >= 1, "bad tuning tolerance or iteration cap");
  require(shift.bid_scale > 0.0 && shift.ctr_scale > 0.0, "shift scales must be > 0");
}

SimConfig SimConfig::shifted() const {
  SimConfig c = *this;
  c.bid.scale *= shift.bid_scale;
  c.ctr.scale *= shift.ctr_scale;
  c.epoch += shift.epoch_offset;
  return c;
}

ordered_json to_json(const SimConfig& c) {
  ordered_json overrides = ordered_json::array();
  for (const auto& [key, g] : c.interaction.overrides) {
    overrides.push_back({{"subcategory", key.first}, {"neighbor", key.second}, {"factor", g}});
  }
  return {
      {"schema_version", kSimConfigSchemaVersion},
      {"seed", c.seed},
      {"epoch", c.epoch},
      {"n_impressions", c.n_impressions},
      {"n_ads", c.n_ads},
      {"n_organics", c.n_organics},
      {"total_slots", c.total_slots},
      {"ad_positions", c.ad_positions},
      {"n_prime", c.n_prime},
      {"n_subcategories", c.n_subcategories},
      {"ad_catalog_size", c.ad_catalog_size},
      {"organic_catalog_size", c.organic_catalog_size},
      {"ad_same_subcategory_share", c.ad_same_subcategory_share},
      {"organic_same_subcategory_share", c.organic_same_subcategory_share},
      {"bid",
       {{"log_mean", c.bid.log_mean},
        {"log_sd", c.bid.log_sd},
        {"subcategory_log_sd", c.bid.subcategory_log_sd},
        {"scale", c.bid.scale}}},
      {"ctr",
       {{"ad_log_mean", c.ctr.ad_log_mean},
        {"ad_log_sd", c.ctr.ad_log_sd},
        {"organic_log_mean", c.ctr.organic_log_mean},
        {"organic_log_sd", c.ctr.organic_log_sd},
        {"scale", c.ctr.scale}}},
      {"position_multipliers", c.position_multipliers},
      {"interaction",
       {{"default_same", c.interaction.default_same},
        {"default_cross", c.interaction.default_cross},
        {"overrides", std::move(overrides)}}},
      {"gsp_exponent", c.gsp_exponent},
      {"floor", c.floor},
      {"payment_scheme", to_string(c.payment_scheme)},
      {"tuning",
       {{"impressions", c.tuning.impressions},
        {"bracket", {c.tuning.bracket_lo, c.tuning.bracket_hi}},
        {"tol", c.tuning.tol},
        {"max_iter", c.tuning.max_iter},
        {"method", to_string(c.tuning.method)}}},
      {"shift",
       {{"bid_scale", c.shift.bid_scale},
        {"ctr_scale", c.shift.ctr_scale},
        {"epoch_offset", c.shift.epoch_offset}}},
      {"threads", c.threads},
  };
}

namespace {

// Reads the keys present in `j` into the matching fields, rejecting anything
// unknown. Missing keys keep their defaults.
class StrictReader {
 public:
  StrictReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw InvalidArgument(where_ + ": expected an object");
  }
  template <typename T>
  StrictReader& field(const char* key, T& out) {
    known_.push_back(key);
    if (j_.contains(key)) {
      try {
        out = j_.at(key).get<T>();
      } catch (const json::exception&) {
        throw InvalidArgument(where_ + ": field '" + key + "' has the wrong type");
      }
    }
    return *this;
  }
  template <typename Fn>
  StrictReader& nested(const char* key, Fn&& fn) {
    known_.push_back(key);
    if (j_.contains(key)) fn(j_.at(key));
    return *this;
  }
  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (std::find(known_.begin(), known_.end(), key) == known_.end()) {
        throw InvalidArgument(where_ + ": unknown key '" + key + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::vector<std::string> known_;
};

}  // namespace

SimConfig sim_config_from_json(const json& j) {
  SimConfig c;
  int version = 0;
  std::string scheme = to_string(c.payment_scheme);
  StrictReader r(j, "sim config");
  r.field("schema_version", version)
      .field("seed", c.seed)
      .field("epoch", c.epoch)
      .field("n_impressions", c.n_impressions)
      .field("n_ads", c.n_ads)
      .field("n_organics", c.n_organics)
      .field("total_slots", c.total_slots)
      .field("ad_positions", c.ad_positions)
      .field("n_prime", c.n_prime)
      .field("n_subcategories", c.n_subcategories)
      .field("ad_catalog_size", c.ad_catalog_size)
      .field("organic_catalog_size", c.organic_catalog_size)
      .field("ad_same_subcategory_share", c.ad_same_subcategory_share)
      .field("organic_same_subcategory_share", c.organic_same_subcategory_share)
      .nested("bid",
              [&](const json& b) {
                StrictReader(b, "bid")
                    .field("log_mean", c.bid.log_mean)
                    .field("log_sd", c.bid.log_sd)
                    .field("subcategory_log_sd", c.bid.subcategory_log_sd)
                    .field("scale", c.bid.scale)
                    .finish();
              })
      .nested("ctr",
              [&](const json& b) {
                StrictReader(b, "ctr")
                    .field("ad_log_mean", c.ctr.ad_log_mean)
                    .field("ad_log_sd", c.ctr.ad_log_sd)
                    .field("organic_log_mean", c.ctr.organic_log_mean)
                    .field("organic_log_sd", c.ctr.organic_log_sd)
                    .field("scale", c.ctr.scale)
                    .finish();
              })
      .field("position_multipliers", c.position_multipliers)
      .nested("interaction",
              [&](const json& b) {
                json overrides = json::array();
                StrictReader(b, "interaction")
                    .field("default_same", c.interaction.default_same)
                    .field("default_cross", c.interaction.default_cross)
                    .field("overrides", overrides)
                    .finish();
                for (const auto& o : overrides) {
                  std::string own, neighbour;
                  double factor = 1.0;
                  StrictReader(o, "interaction override")
                      .field("subcategory", own)
                      .field("neighbor", neighbour)
                      .field("factor", factor)
                      .finish();
                  c.interaction.overrides[{own, neighbour}] = factor;
                }
              })
      .field("gsp_exponent", c.gsp_exponent)
      .field("floor", c.floor)
      .field("payment_scheme", scheme)
      .nested("tuning",
              [&](const json& b) {
                std::vector<double> bracket = {c.tuning.bracket_lo, c.tuning.bracket_hi};
                std::string method = to_string(c.tuning.method);
                StrictReader(b, "tuning")
                    .field("impressions", c.tuning.impressions)
                    .field("bracket", bracket)
                    .field("tol", c.tuning.tol)
                    .field("max_iter", c.tuning.max_iter)
                    .field("method", method)
                    .finish();
                if (bracket.size() != 2) throw InvalidArgument("tuning.bracket must have two entries");
                c.tuning.bracket_lo = bracket[0];
                c.tuning.bracket_hi = bracket[1];
                c.tuning.method = tune_method_from_string(method);
              })
      .nested("shift",
              [&](const json& b) {
                StrictReader(b, "shift")
                    .field("bid_scale", c.shift.bid_scale)
                    .field("ctr_scale", c.shift.ctr_scale)
                    .field("epoch_offset", c.shift.epoch_offset)
                    .finish();
              })
      .field("threads", c.threads)
      .finish();
  if (version != kSimConfigSchemaVersion) {
    throw InvalidArgument("sim config: schema_version must be " + std::to_string(kSimConfigSchemaVersion));
  }
  c.payment_scheme = payment_scheme_from_string(scheme);
  c.validate();
  return c;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t stream_id(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::mt19937_64 keyed_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t key = splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ counter);
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
  return std::mt19937_64(seq);
}

namespace {

struct CatalogItem {
  std::string id;
  std::size_t subcategory;
  double base_ctr;
  double bid;  // ads only
};

struct Catalog {
  std::vector<CatalogItem> ads;
  std::vector<CatalogItem> organics;
  std::vector<std::vector<std::size_t>> ads_by_subcat;
  std::vector<std::vector<std::size_t>> organics_by_subcat;
};

std::string subcat_label(std::size_t c) { return "c" + std::to_string(c); }

Catalog build_catalog(const SimConfig& config) {
  // Draws do not depend on the scale parameters, so a shifted environment
  // keeps the same items.
  auto rng = keyed_rng(config.seed, stream_id("catalog"), 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t s = config.n_subcategories;
  std::vector<double> subcat_loc(s);
  for (auto& loc : subcat_loc) loc = config.bid.subcategory_log_sd * normal(rng);

  Catalog cat;
  cat.ads_by_subcat.resize(s);
  cat.organics_by_subcat.resize(s);
  for (std::size_t i = 0; i < config.ad_catalog_size; ++i) {
    const std::size_t c = i % s;
    const double z_ctr = normal(rng);
    const double z_bid = normal(rng);
    const double ctr = std::min(0.95, config.ctr.scale * std::exp(config.ctr.ad_log_mean + config.ctr.ad_log_sd * z_ctr));
    const double bid = config.bid.scale * std::exp(config.bid.log_mean + subcat_loc[c] + config.bid.log_sd * z_bid);
    cat.ads.push_back({"ad-" + std::to_string(i), c, ctr, bid});
    cat.ads_by_subcat[c].push_back(i);
  }
  for (std::size_t i = 0; i < config.organic_catalog_size; ++i) {
    const std::size_t c = i % s;
    const double z_ctr = normal(rng);
    const double ctr =
        std::min(0.95, config.ctr.scale * std::exp(config.ctr.organic_log_mean + config.ctr.organic_log_sd * z_ctr));
    cat.organics.push_back({"org-" + std::to_string(i), c, ctr, 0.0});
    cat.organics_by_subcat[c].push_back(i);
  }
  return cat;
}

// Draws `count` distinct catalog indices, each from the page subcategory with
// probability `same_share` (while that pool has unused items) else uniformly.
std::vector<std::size_t> draw_candidates(std::mt19937_64& rng, std::size_t count, std::size_t catalog_size,
                                         const std::vector<std::size_t>& same_pool, double same_share) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> out;
  std::unordered_set<std::size_t> used;
  std::size_t same_used = 0;
  while (out.size() < count) {
    std::size_t pick;
    if (same_used < same_pool.size() && unit(rng) < same_share) {
      pick = same_pool[std::uniform_int_distribution<std::size_t>(0, same_pool.size() - 1)(rng)];
    } else {
      pick = std::uniform_int_distribution<std::size_t>(0, catalog_size - 1)(rng);
    }
    if (!used.insert(pick).second) continue;
    if (std::binary_search(same_pool.begin(), same_pool.end(), pick)) ++same_used;
    out.push_back(pick);
  }
  return out;
}

}  // namespace

SyntheticJointModel build_truth_model(const SimConfig& config) {
  config.validate();
  const Catalog cat = build_catalog(config);
  std::unordered_map<std::string, double> base;
  base.reserve(cat.ads.size() + cat.organics.size());
  for (const auto& a : cat.ads) base.emplace(a.id, a.base_ctr);
  for (const auto& o : cat.organics) base.emplace(o.id, o.base_ctr);
  InteractionConfig ic = config.interaction;
  return SyntheticJointModel(std::move(base), config.position_multipliers, std::move(ic));
}

std::vector<Impression> generate_epoch(const SimConfig& config) {
  return generate_epoch(config, "epoch", config.n_impressions);
}

std::vector<Impression> generate_epoch(const SimConfig& config, std::string_view label, std::size_t n_impressions) {
  config.validate();
  const Catalog cat = build_catalog(config);
  const PositionLayout layout = config.layout();
  const std::uint64_t stream = stream_id(label) ^ splitmix64(config.epoch);
  const std::string prefix = std::string(label) + "-" + std::to_string(config.epoch) + "-";

  std::vector<Impression> log(n_impressions);
  parallel_for(n_impressions, config.threads, [&](std::size_t i) {
    auto rng = keyed_rng(config.seed, stream, i);
    const std::size_t page =
        std::uniform_int_distribution<std::size_t>(0, config.n_subcategories - 1)(rng);

    Impression& imp = log[i];
    imp.impression_id = prefix + std::to_string(i);
    imp.context_features = {static_cast<double>(page)};
    imp.page_subcategory = subcat_label(page);
    imp.layout = layout;

    const auto ads = draw_candidates(rng, config.n_ads, cat.ads.size(), cat.ads_by_subcat[page],
                                     config.ad_same_subcategory_share);
    std::vector<double> ecpm;
    for (std::size_t a : ads) {
      const auto& item = cat.ads[a];
      imp.ads.push_back({item.id, item.bid, subcat_label(item.subcategory), {static_cast<double>(item.subcategory)}});
      ecpm.push_back(item.bid * std::pow(item.base_ctr, config.gsp_exponent));
    }
    // Pre-rank by baseline weighted eCPM; draw order breaks ties.
    std::vector<std::size_t> order(ads.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return ecpm[x] > ecpm[y]; });
    std::vector<AdCandidate> ranked;
    for (std::size_t k : order) ranked.push_back(std::move(imp.ads[k]));
    imp.ads = std::move(ranked);

    auto orgs = draw_candidates(rng, config.n_organics, cat.organics.size(), cat.organics_by_subcat[page],
                                config.organic_same_subcategory_share);
    std::stable_sort(orgs.begin(), orgs.end(),
                     [&](std::size_t x, std::size_t y) { return cat.organics[x].base_ctr > cat.organics[y].base_ctr; });
    for (std::size_t o : orgs) {
      const auto& item = cat.organics[o];
      imp.organics.push_back({item.id, subcat_label(item.subcategory), {static_cast<double>(item.subcategory)}});
    }
  });
  return log;
}

std::vector<bool> realize_clicks(const MixedTuple& tuple, const CtrVector& truth_ctrs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<bool> clicks(tuple.slots.size(), false);
  for (std::size_t p = 0; p < tuple.slots.size(); ++p) {
    if (tuple.slots[p].kind == SlotKind::kEmpty) continue;
    clicks[p] = unit(rng) < truth_ctrs[p];
  }
  return clicks;
}

}  // namespace blend::sim
