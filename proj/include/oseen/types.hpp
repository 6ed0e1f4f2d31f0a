#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>

namespace oseen {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// A point of R^3. The free stream points along +e1.
using Point3 = Vec3;

inline const Vec3 e1{1.0, 0.0, 0.0};

/// Derivative selector d = (alpha, l): spatial multi-index alpha and time order l.
/// Only |alpha| + l <= 1 is supported anywhere in the library.
struct MultiIndex {
    std::array<int, 3> alpha{0, 0, 0};
    int l = 0;

    static constexpr MultiIndex value() { return {}; }
    static MultiIndex dx(int axis) {
        MultiIndex d;
        d.alpha.at(static_cast<std::size_t>(axis)) = 1;
        return d;
    }
    static constexpr MultiIndex dt() { return {{0, 0, 0}, 1}; }

    int spatial_order() const { return alpha[0] + alpha[1] + alpha[2]; }
    int order() const { return spatial_order() + l; }

    /// Index of the differentiated axis, or -1 when alpha = 0.
    int axis() const {
        for (int i = 0; i < 3; ++i)
            if (alpha[static_cast<std::size_t>(i)] != 0) return i;
        return -1;
    }

    void validate() const {
        for (int a : alpha)
            if (a < 0) throw std::invalid_argument("MultiIndex: negative component");
        if (l < 0) throw std::invalid_argument("MultiIndex: negative time order");
        if (order() > 1)
            throw std::invalid_argument("MultiIndex: only |alpha| + l <= 1 is supported");
    }

    std::string label() const {
        if (l == 1) return "dt";
        int ax = axis();
        if (ax < 0) return "value";
        return "d" + std::to_string(ax + 1);
    }

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

}  // namespace oseen
