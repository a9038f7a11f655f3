#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ta::resources {

/// Contents of a bundled data file, addressed by its path relative to data/
/// (e.g. "scenes/kendall_base.json"). Throws ta::Error if absent.
std::string_view get(std::string_view name);

bool contains(std::string_view name);

/// Names of bundled files under a directory prefix, sorted.
std::vector<std::string> list(std::string_view prefix);

}  // namespace ta::resources
