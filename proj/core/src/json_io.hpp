#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "popaudit/engines.hpp"

namespace popaudit::json_io {

using nlohmann::json;

json to_json(const HyperParams& hp);

// Overlays the keys of `j` onto `hp`. Unknown keys and type errors are
// appended to `violations` as "<prefix><key>: <reason>".
void merge_hyper_params(const json& j, HyperParams& hp, std::vector<std::string>& violations,
                        const std::string& prefix = "");

}  // namespace popaudit::json_io
