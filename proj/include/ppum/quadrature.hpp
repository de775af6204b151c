#ifndef PPUM_QUADRATURE_HPP
#define PPUM_QUADRATURE_HPP

#include <array>

namespace ppum {

struct TriQuadPoint {
    std::array<double, 3> bary;
    double weight; // relative to unit total; multiply by element area
};

// 6-point order-4 symmetric triangle rule (two 3-point orbits).
inline const std::array<TriQuadPoint, 6>& tri_quadrature() {
    static const std::array<TriQuadPoint, 6> rule = [] {
        constexpr double a1 = 0.816847572980459, b1 = 0.091576213509771, w1 = 0.109951743655322;
        constexpr double a2 = 0.108103018168070, b2 = 0.445948490915965, w2 = 0.223381589678011;
        return std::array<TriQuadPoint, 6>{{{{a1, b1, b1}, w1},
                                            {{b1, a1, b1}, w1},
                                            {{b1, b1, a1}, w1},
                                            {{a2, b2, b2}, w2},
                                            {{b2, a2, b2}, w2},
                                            {{b2, b2, a2}, w2}}};
    }();
    return rule;
}

struct EdgeQuadPoint {
    double t;      // parameter in (0,1) along the edge
    double weight; // relative to unit total; multiply by edge length
};

// 2-point Gauss rule on an edge (order 3).
inline const std::array<EdgeQuadPoint, 2>& edge_quadrature() {
    static const std::array<EdgeQuadPoint, 2> rule = [] {
        const double s = 0.5 / std::sqrt(3.0);
        return std::array<EdgeQuadPoint, 2>{{{0.5 - s, 0.5}, {0.5 + s, 0.5}}};
    }();
    return rule;
}

} // namespace ppum

#endif // PPUM_QUADRATURE_HPP
