#include "laplace/model.hpp"

#include <stdexcept>
#include <string>

namespace laplace {

void Model::validate() const {
    if (d < 1) throw std::invalid_argument("Model: d must be >= 1");
    if (L < 1) throw std::invalid_argument("Model: L must be >= 1");
    for (const auto& [k, T] : f_tensors) {
        if (k < 3 || k > 2 * L + 1)
            throw std::invalid_argument("Model: f tensor order " + std::to_string(k) +
                                        " outside 3.." + std::to_string(2 * L + 1));
        if (T.order() != k || T.dim() != d)
            throw std::invalid_argument("Model: f tensor at order " + std::to_string(k) +
                                        " has mismatched shape");
    }
    for (const auto& [k, T] : logg_tensors) {
        if (k < 1 || k > 2 * L - 1)
            throw std::invalid_argument("Model: log g tensor order " + std::to_string(k) +
                                        " outside 1.." + std::to_string(2 * L - 1));
        if (T.order() != k || T.dim() != d)
            throw std::invalid_argument("Model: log g tensor at order " + std::to_string(k) +
                                        " has mismatched shape");
    }
}

double Model::max_entry() const {
    double m = 0.0;
    for (const auto& [k, T] : f_tensors) m = std::max(m, T.max_abs());
    for (const auto& [k, T] : logg_tensors) m = std::max(m, T.max_abs());
    return m;
}

}  // namespace laplace
