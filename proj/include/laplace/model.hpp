#pragma once

#include <map>
#include <string>

#include "laplace/sym_tensor.hpp"

namespace laplace {

// Jet data of a standardized integrand pair (f, g) at the origin:
// f has f(0)=0, vanishing gradient and identity Hessian, so only its
// derivative tensors of order 3..2L+1 are stored; log g is stored through
// order 2L-1 with g(0)=1 implicit. Missing orders mean zero tensors.
struct Model {
    int d = 1;
    int L = 2;
    std::map<int, SymTensor> f_tensors;     // order k -> grad^k f(0), k in 3..2L+1
    std::map<int, SymTensor> logg_tensors;  // order k -> grad^k log g(0), k in 1..2L-1
    std::string label;

    const SymTensor* f_tensor(int k) const {
        auto it = f_tensors.find(k);
        return it == f_tensors.end() ? nullptr : &it->second;
    }
    const SymTensor* logg_tensor(int k) const {
        auto it = logg_tensors.find(k);
        return it == logg_tensors.end() ? nullptr : &it->second;
    }

    void validate() const;

    // Largest |entry| over all stored tensors (scale for relative thresholds).
    double max_entry() const;
};

}  // namespace laplace
