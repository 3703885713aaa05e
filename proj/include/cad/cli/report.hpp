#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cad::cli {

using Json = nlohmann::ordered_json;

struct Case {
  std::string name;
  double max_rel_err = 0.0;
  bool pass = false;
  std::string detail;
  Json extra = Json::object();  // command-specific numeric fields
};

struct Report {
  std::string command;
  std::uint64_t seed = 0;
  std::optional<double> tol;
  std::vector<Case> cases;

  std::size_t passed() const {
    return static_cast<std::size_t>(
        std::count_if(cases.begin(), cases.end(), [](const Case& c) { return c.pass; }));
  }
  bool ok() const { return passed() == cases.size(); }

  void sort_cases() {
    std::stable_sort(cases.begin(), cases.end(),
                     [](const Case& a, const Case& b) { return a.name < b.name; });
  }

  Json to_json() const {
    Json j;
    j["command"] = command;
    j["seed"] = seed;
    j["tol"] = tol ? Json(*tol) : Json(nullptr);
    Json arr = Json::array();
    for (const auto& c : cases) {
      Json jc;
      jc["name"] = c.name;
      jc["max_rel_err"] = c.max_rel_err;
      jc["pass"] = c.pass;
      jc["detail"] = c.detail;
      for (const auto& [k, v] : c.extra.items()) jc[k] = v;
      arr.push_back(std::move(jc));
    }
    j["cases"] = std::move(arr);
    j["summary"] = {{"total", cases.size()}, {"passed", passed()}};
    return j;
  }
};

}  // namespace cad::cli
