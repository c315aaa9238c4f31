#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "personagen/error.hpp"
#include "personagen/json_util.hpp"
#include "personagen/rng.hpp"
#include "personagen/text.hpp"

namespace pgen {

// Weighted demographic sampling tables. CSV rows are `table,value,weight`;
// the value field may itself contain commas (first and last comma delimit).
// Location values pair country and city as "Country|City"; occupation
// tables may be specialized per age bracket as "occupation.<bracket>".
struct DemographicTables {
  struct Row {
    std::string value;
    double weight = 0.0;
  };

  std::map<std::string, std::vector<Row>> tables;

  void validate() const {
    if (tables.empty()) throw InvalidInput("no demographic tables loaded");
    for (const auto& [name, rows] : tables) {
      if (rows.empty()) throw InvalidInput("empty demographic table: " + name);
      double sum = 0.0;
      for (const Row& r : rows) {
        if (!(r.weight > 0.0))
          throw InvalidInput("non-positive weight in table " + name);
        if (trim(r.value).empty())
          throw InvalidInput("blank value in table " + name);
        sum += r.weight;
      }
      if (std::fabs(sum - 1.0) > 1e-9)
        throw InvalidInput("weights in table " + name + " sum to " +
                           std::to_string(sum) + ", expected 1.0");
    }
  }

  const std::vector<Row>& table(const std::string& name) const {
    auto it = tables.find(name);
    if (it == tables.end()) throw InvalidInput("missing demographic table: " + name);
    return it->second;
  }

  bool has(const std::string& name) const { return tables.count(name) > 0; }

  const std::string& draw(const std::string& name, Rng& rng) const {
    const std::vector<Row>& rows = table(name);
    std::vector<double> weights;
    weights.reserve(rows.size());
    for (const Row& r : rows) weights.push_back(r.weight);
    return rows[rng.weighted(weights)].value;
  }

  static DemographicTables from_csv_text(const std::string& text) {
    DemographicTables out;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      if (line_no == 1 && to_lower(t).rfind("table,", 0) == 0) continue;  // header
      size_t first = t.find(',');
      size_t last = t.rfind(',');
      if (first == std::string::npos || last == first)
        throw InvalidInput("malformed demographic CSV line " +
                           std::to_string(line_no) + ": " + t);
      std::string name = trim(t.substr(0, first));
      std::string value = trim(t.substr(first + 1, last - first - 1));
      double weight = 0.0;
      try {
        weight = std::stod(t.substr(last + 1));
      } catch (const std::exception&) {
        throw InvalidInput("bad weight on demographic CSV line " +
                           std::to_string(line_no));
      }
      out.tables[name].push_back({value, weight});
    }
    out.validate();
    return out;
  }

  static DemographicTables from_csv(const std::filesystem::path& file) {
    return from_csv_text(read_file(file));
  }

  static const DemographicTables& bundled() {
    static const DemographicTables kTables = from_csv_text(bundled_csv());
    return kTables;
  }

  static std::string bundled_csv() {
    return R"(table,value,weight
age_group,13-17,0.08
age_group,18-29,0.24
age_group,30-44,0.28
age_group,45-59,0.22
age_group,60-74,0.13
age_group,75-100,0.05
gender,female,0.48
gender,male,0.48
gender,non-binary,0.04
location,USA|New York,0.10
location,Germany|Berlin,0.10
location,Japan|Osaka,0.10
location,India|Mumbai,0.10
location,Kenya|Nairobi,0.075
location,Australia|Sydney,0.075
location,Argentina|Buenos Aires,0.075
location,Brazil|Sao Paulo,0.075
location,UK|London,0.075
location,Vietnam|Hanoi,0.075
location,Canada|Toronto,0.075
location,Nigeria|Lagos,0.075
occupation.13-17,student,1.0
occupation.18-29,student,0.30
occupation.18-29,software developer,0.12
occupation.18-29,nurse,0.12
occupation.18-29,retail associate,0.16
occupation.18-29,graduate researcher,0.10
occupation.18-29,construction worker,0.10
occupation.18-29,waiter,0.10
occupation.30-44,nurse,0.14
occupation.30-44,teacher,0.16
occupation.30-44,software engineer,0.14
occupation.30-44,small business owner,0.14
occupation.30-44,accountant,0.12
occupation.30-44,factory supervisor,0.10
occupation.30-44,farmer,0.10
occupation.30-44,civil servant,0.10
occupation.45-59,teacher,0.16
occupation.45-59,operations manager,0.14
occupation.45-59,farmer,0.12
occupation.45-59,accountant,0.12
occupation.45-59,civil servant,0.12
occupation.45-59,shop owner,0.12
occupation.45-59,logistics coordinator,0.12
occupation.45-59,nurse,0.10
occupation.60-74,retired,0.55
occupation.60-74,consultant,0.15
occupation.60-74,farmer,0.10
occupation.60-74,shop owner,0.10
occupation.60-74,part-time bookkeeper,0.10
occupation.75-100,retired,0.90
occupation.75-100,volunteer,0.10
)";
  }
};

// Bracket labels are "lo-hi"; both bounds inclusive.
inline void parse_age_bracket(const std::string& label, int& lo, int& hi) {
  size_t dash = label.find('-');
  if (dash == std::string::npos)
    throw InvalidInput("malformed age bracket: " + label);
  try {
    lo = std::stoi(label.substr(0, dash));
    hi = std::stoi(label.substr(dash + 1));
  } catch (const std::exception&) {
    throw InvalidInput("malformed age bracket: " + label);
  }
  if (lo > hi) throw InvalidInput("inverted age bracket: " + label);
}

inline std::string bracket_for_age(const DemographicTables& tables, int age) {
  for (const auto& row : tables.table("age_group")) {
    int lo = 0;
    int hi = 0;
    parse_age_bracket(row.value, lo, hi);
    if (age >= lo && age <= hi) return row.value;
  }
  throw InvalidInput("age outside all brackets: " + std::to_string(age));
}

}  // namespace pgen
