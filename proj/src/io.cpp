#include "blend/io.hpp"

#include <fstream>
#include <sstream>

namespace blend {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <typename T>
T required(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InvalidArgument(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
T optional_field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument(std::string("field '") + key + "' has the wrong type");
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw InvalidArgument(where + ": unknown key '" + key + "'");
  }
}

}  // namespace

ordered_json to_json(const PositionLayout& layout) {
  return {{"total_slots", layout.total_slots()},
          {"ad_positions", layout.ad_positions()},
          {"organic_positions", layout.organic_positions()}};
}

PositionLayout layout_from_json(const json& j) {
  return PositionLayout(required<std::size_t>(j, "total_slots"),
                        required<std::vector<std::size_t>>(j, "ad_positions"),
                        required<std::vector<std::size_t>>(j, "organic_positions"));
}

ordered_json to_json(const Impression& imp) {
  ordered_json ads = ordered_json::array();
  for (const auto& ad : imp.ads) {
    ads.push_back({{"ad_id", ad.ad_id},
                   {"bid_cpc", ad.bid_cpc},
                   {"subcategory", ad.subcategory},
                   {"features", ad.features}});
  }
  ordered_json orgs = ordered_json::array();
  for (const auto& o : imp.organics) {
    orgs.push_back({{"item_id", o.item_id}, {"subcategory", o.subcategory}, {"features", o.features}});
  }
  ordered_json j = {{"impression_id", imp.impression_id},
                    {"context_features", imp.context_features},
                    {"ads", std::move(ads)},
                    {"organics", std::move(orgs)},
                    {"layout", to_json(imp.layout)}};
  if (!imp.page_subcategory.empty()) j["page_subcategory"] = imp.page_subcategory;
  return j;
}

Impression impression_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("impression must be a JSON object");
  Impression imp;
  imp.impression_id = required<std::string>(j, "impression_id");
  imp.context_features = optional_field<std::vector<double>>(j, "context_features", {});
  imp.layout = layout_from_json(required<json>(j, "layout"));
  imp.page_subcategory = optional_field<std::string>(j, "page_subcategory", "");
  const json ads = required<json>(j, "ads");
  for (const auto& a : ads) {
    imp.ads.push_back(AdCandidate{required<std::string>(a, "ad_id"), required<double>(a, "bid_cpc"),
                                  required<std::string>(a, "subcategory"),
                                  optional_field<std::vector<double>>(a, "features", {})});
  }
  const json organics = required<json>(j, "organics");
  for (const auto& o : organics) {
    imp.organics.push_back(OrganicItem{required<std::string>(o, "item_id"), required<std::string>(o, "subcategory"),
                                       optional_field<std::vector<double>>(o, "features", {})});
  }
  imp.validate();
  return imp;
}

std::vector<Impression> read_impression_log(std::istream& in) {
  std::vector<Impression> log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw LogParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    try {
      log.push_back(impression_from_json(j));
    } catch (const InvalidArgument& e) {
      throw LogParseError(line_no, e.what());
    }
  }
  return log;
}

std::vector<Impression> read_impression_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open impression log " + path.string());
  return read_impression_log(in);
}

void write_impression_log(std::ostream& out, const std::vector<Impression>& log) {
  for (const auto& imp : log) out << to_json(imp).dump() << '\n';
}

void write_impression_log(const std::filesystem::path& path, const std::vector<Impression>& log) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_impression_log(out, log);
  if (!out) throw IoError("write failed for " + path.string());
}

ordered_json to_json(const SyntheticJointModel& model) {
  // Sorted keys so the document is reproducible.
  std::map<std::string, double> base(model.base_ctr().begin(), model.base_ctr().end());
  ordered_json base_j = ordered_json::object();
  for (const auto& [id, p] : base) base_j[id] = p;
  ordered_json overrides = ordered_json::array();
  for (const auto& [key, g] : model.interaction().overrides) {
    overrides.push_back({{"subcategory", key.first}, {"neighbor", key.second}, {"factor", g}});
  }
  return {{"base_ctr", std::move(base_j)},
          {"position_multipliers", model.position_multipliers()},
          {"interaction",
           {{"default_same", model.interaction().default_same},
            {"default_cross", model.interaction().default_cross},
            {"overrides", std::move(overrides)}}}};
}

SyntheticJointModel model_from_json(const json& j) {
  try {
    reject_unknown(j, {"schema_version", "base_ctr", "position_multipliers", "interaction"}, "model config");
    std::unordered_map<std::string, double> base;
    const json base_j = required<json>(j, "base_ctr");
    for (const auto& [id, p] : base_j.items()) base.emplace(id, p.get<double>());
    InteractionConfig ic;
    if (j.contains("interaction")) {
      const auto& ij = j.at("interaction");
      reject_unknown(ij, {"default_same", "default_cross", "overrides"}, "interaction");
      ic.default_same = optional_field<double>(ij, "default_same", 1.0);
      ic.default_cross = optional_field<double>(ij, "default_cross", 1.0);
      const json overrides = optional_field<json>(ij, "overrides", json::array());
      for (const auto& o : overrides) {
        ic.overrides[{required<std::string>(o, "subcategory"), required<std::string>(o, "neighbor")}] =
            required<double>(o, "factor");
      }
    }
    return SyntheticJointModel(std::move(base), required<std::vector<double>>(j, "position_multipliers"),
                               std::move(ic));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
}

SyntheticJointModel read_model(const std::filesystem::path& path) { return model_from_json(read_json_file(path)); }

ordered_json to_json(const MixedTuple& tuple, const Impression& imp) {
  ordered_json slots = ordered_json::array();
  for (std::size_t p = 0; p < tuple.slots.size(); ++p) {
    const Slot& s = tuple.slots[p];
    switch (s.kind) {
      case SlotKind::kAd:
        slots.push_back({{"position", p}, {"kind", "ad"}, {"id", imp.ads[s.index].ad_id}, {"candidate", s.index}});
        break;
      case SlotKind::kOrganic:
        slots.push_back(
            {{"position", p}, {"kind", "organic"}, {"id", imp.organics[s.index].item_id}, {"candidate", s.index}});
        break;
      case SlotKind::kEmpty:
        slots.push_back({{"position", p}, {"kind", "empty"}});
        break;
    }
  }
  return slots;
}

ordered_json to_json(const PaymentSchedule& schedule) {
  ordered_json out = ordered_json::array();
  for (const auto& p : schedule.ads) {
    ordered_json rec = {{"ad_id", p.ad_id}, {"scheme", to_string(schedule.scheme)}};
    rec["price_per_click"] = p.price_per_click ? ordered_json(*p.price_per_click) : ordered_json(nullptr);
    rec["expected_payment"] = p.expected_payment;
    if (schedule.scheme == PaymentScheme::kVcg) rec["unreserved_payment"] = p.unreserved_payment;
    out.push_back(std::move(rec));
  }
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace blend
