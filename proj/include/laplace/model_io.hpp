#pragma once

#include <string>

#include "laplace/model.hpp"

namespace laplace {

// Parses the textual model format:
//   { "d": 2, "L": 2, "label": "...",
//     "f_derivatives": { "4": [[[1,1,2,2], 2.0], ...], ... },
//     "log_g_derivatives": { ... } }
// Index lists are 1-based, sorted, one entry per permutation class. Throws
// std::invalid_argument whose message names the offending field path.
Model model_from_json(const std::string& text);

// Canonical writer: orders ascending, classes in tensor rank order, zero
// entries and all-zero tensors omitted, floats in shortest round-trip form.
// Parsing the output reproduces the model exactly.
std::string model_to_json(const Model& m);

}  // namespace laplace
