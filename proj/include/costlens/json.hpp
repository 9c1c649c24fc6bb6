#pragma once

#include <json.hpp>

namespace costlens {

// Insertion-ordered: aggregate order and report layouts are significant.
using Json = nlohmann::ordered_json;

}  // namespace costlens
