// Test helpers shared by the unit and acceptance suites.
#ifndef TSOLIVE_TESTS_ZOO_HPP_
#define TSOLIVE_TESTS_ZOO_HPP_

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "tsolive/dsl.hpp"

namespace zoo {

inline std::string Slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::shared_ptr<const tsolive::Library> Load(const std::string& name) {
  return std::make_shared<const tsolive::Library>(
      tsolive::ParseLibrary(Slurp(std::string(TSOLIVE_ZOO_DIR) + "/" + name + ".lib")));
}

inline std::shared_ptr<const tsolive::Library> FromText(const std::string& text) {
  return std::make_shared<const tsolive::Library>(tsolive::ParseLibrary(text));
}

inline const std::vector<std::string>& Names() {
  static const std::vector<std::string> names = {
      "trivial", "spin",     "wait_flag",  "sb",         "flag",
      "spinlock", "cas_counter", "cas_fenced", "maybe_spin", "two_writes", "toggle", "backoff"};
  return names;
}

}  // namespace zoo

#endif  // TSOLIVE_TESTS_ZOO_HPP_
