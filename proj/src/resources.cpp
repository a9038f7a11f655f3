#include "travelagent/resources.hpp"

#include <map>

#include "travelagent/error.hpp"

namespace ta::resources {

namespace detail {
const std::map<std::string, std::string_view>& table();
}

std::string_view get(std::string_view name) {
  const auto& t = detail::table();
  auto it = t.find(std::string(name));
  if (it == t.end()) throw Error("bundled resource '" + std::string(name) + "' not found");
  return it->second;
}

bool contains(std::string_view name) { return detail::table().contains(std::string(name)); }

std::vector<std::string> list(std::string_view prefix) {
  std::vector<std::string> out;
  for (const auto& [name, _] : detail::table())
    if (name.starts_with(prefix)) out.push_back(name);
  return out;
}

}  // namespace ta::resources
