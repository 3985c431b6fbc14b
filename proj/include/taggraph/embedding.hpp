#pragma once

#include <Eigen/Core>
#include <stdexcept>

namespace taggraph {

using EmbeddingVector = Eigen::VectorXd;

inline bool all_finite(const EmbeddingVector& v) {
    return v.allFinite();
}

// Scales to unit L2 norm. Zero or non-finite input -> error.
inline EmbeddingVector normalized(const EmbeddingVector& v) {
    if (!all_finite(v)) throw std::runtime_error("embedding has non-finite entries");
    double n = v.norm();
    if (n == 0.0) throw std::runtime_error("cannot normalize zero vector");
    return v / n;
}

}  // namespace taggraph
