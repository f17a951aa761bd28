#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "reclab/core.hpp"

namespace reclab {

/// Ratings plus the raw MovieLens ids behind each dense index.
struct Ml100kData {
  ObservationSet observations;
  std::vector<std::int64_t> raw_user_ids;  // dense index -> raw id
  std::vector<std::int64_t> raw_item_ids;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses MovieLens u.data text: user, item, rating, timestamp separated by
/// tabs. Raw ids are remapped to dense indices in ascending raw-id order.
inline Ml100kData parse_ml100k(std::istream& in, const std::string& source = "<stream>") {
  struct Row {
    std::int64_t user, item;
    double rating;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string f_user, f_item, f_rating, f_time;
    if (!std::getline(fields, f_user, '\t') || !std::getline(fields, f_item, '\t') ||
        !std::getline(fields, f_rating, '\t') || !std::getline(fields, f_time, '\t')) {
      throw DataError(source + ":" + std::to_string(line_no) + ": expected 4 tab-separated fields");
    }
    Row r{};
    r.line = line_no;
    try {
      std::size_t used = 0;
      r.user = std::stoll(f_user, &used);
      if (used != f_user.size()) throw std::invalid_argument("user");
      r.item = std::stoll(f_item, &used);
      if (used != f_item.size()) throw std::invalid_argument("item");
      r.rating = std::stod(f_rating, &used);
      if (used != f_rating.size()) throw std::invalid_argument("rating");
      (void)std::stoll(f_time, &used);
      if (used != f_time.size()) throw std::invalid_argument("timestamp");
    } catch (const std::exception&) {
      throw DataError(source + ":" + std::to_string(line_no) + ": malformed field in '" + line + "'");
    }
    if (r.rating < 1.0 || r.rating > 5.0) {
      throw DataError(source + ":" + std::to_string(line_no) + ": rating outside [1, 5]");
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw DataError(source + ": no ratings");

  Ml100kData data;
  for (const auto& r : rows) {
    data.raw_user_ids.push_back(r.user);
    data.raw_item_ids.push_back(r.item);
  }
  auto dedup = [](std::vector<std::int64_t>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  dedup(data.raw_user_ids);
  dedup(data.raw_item_ids);
  auto index_of = [](const std::vector<std::int64_t>& ids, std::int64_t raw) {
    return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), raw) - ids.begin());
  };

  data.observations = ObservationSet(data.raw_user_ids.size(), data.raw_item_ids.size());
  for (const auto& r : rows) {
    const Observation o{index_of(data.raw_user_ids, r.user), index_of(data.raw_item_ids, r.item), r.rating, 0};
    if (!data.observations.try_insert(o)) {
      throw DataError(source + ":" + std::to_string(r.line) + ": duplicate rating for user " +
                      std::to_string(r.user) + ", item " + std::to_string(r.item));
    }
  }
  return data;
}

inline Ml100kData load_ml100k(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return parse_ml100k(in, path);
}

}  // namespace reclab
