#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "blend/core.hpp"
#include "blend/ctr.hpp"
#include "blend/payments.hpp"

namespace blend {

/// A log line could not be parsed or validated. what() names the line.
class LogParseError : public InvalidArgument {
 public:
  LogParseError(std::size_t line, const std::string& message)
      : InvalidArgument("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

nlohmann::ordered_json to_json(const PositionLayout& layout);
PositionLayout layout_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const Impression& impression);
/// Throws InvalidArgument on missing/mistyped fields or broken invariants.
Impression impression_from_json(const nlohmann::json& j);

/// One impression per line; blank lines are skipped.
std::vector<Impression> read_impression_log(std::istream& in);
std::vector<Impression> read_impression_log(const std::filesystem::path& path);
void write_impression_log(std::ostream& out, const std::vector<Impression>& log);
void write_impression_log(const std::filesystem::path& path, const std::vector<Impression>& log);

/// Model configuration document:
///   { "base_ctr": {id: p, ...}, "position_multipliers": [...],
///     "interaction": { "default_same": g, "default_cross": g,
///                      "overrides": [{"subcategory": s, "neighbor": t, "factor": g}] } }
nlohmann::ordered_json to_json(const SyntheticJointModel& model);
SyntheticJointModel model_from_json(const nlohmann::json& j);
SyntheticJointModel read_model(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const MixedTuple& tuple, const Impression& impression);
nlohmann::ordered_json to_json(const PaymentSchedule& schedule);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace blend
