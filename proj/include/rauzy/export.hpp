#pragma once

#include "arith.hpp"
#include "path_builder.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace rauzy {

// Fixed projection of the 3-simplex to the unit square: (x, y) = (l2 + l3, l3 + l4).
inline constexpr int kProjection[2][4] = {{0, 1, 1, 0}, {0, 0, 1, 1}};

inline unsigned decimal_digits(unsigned precision_bits) {
    return static_cast<unsigned>(std::ceil(precision_bits * 0.30102999566398120)) + 1;
}

inline void write_csv(std::ostream& os, const PathApproximation& p, unsigned precision_bits) {
    const unsigned digits = decimal_digits(precision_bits);
    os << "t";
    const std::size_t n = p.breakpoints.empty() ? 0 : p.breakpoints.front().lengths.size();
    for (std::size_t i = 1; i <= n; ++i) os << ",l" << i;
    os << ",depth_class\n";
    for (const auto& b : p.breakpoints) {
        os << to_decimal(b.t, digits);
        for (const auto& x : b.normalized()) os << ',' << to_decimal(x, digits);
        os << ',' << b.depth_class << '\n';
    }
}

inline std::pair<double, double> project(const std::vector<Rational>& l) {
    double x = 0, y = 0;
    for (std::size_t i = 0; i < l.size() && i < 4; ++i) {
        const double v = to_double(l[i]);
        x += kProjection[0][i] * v;
        y += kProjection[1][i] * v;
    }
    return {x, y};
}

inline void write_svg(std::ostream& os, const std::vector<PathApproximation>& segments, int size = 600) {
    const double pad = 20, scale = size - 2 * pad;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
       << size << ' ' << size << "\">\n";
    os << "<!-- projection rows: (0,1,1,0) (0,0,1,1) -->\n";
    os << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << scale << "\" height=\"" << scale
       << "\" fill=\"none\" stroke=\"#999\"/>\n";
    os << std::fixed << std::setprecision(3);
    for (const auto& seg : segments) {
        os << "<polyline fill=\"none\" stroke=\"#1f4e99\" stroke-width=\"1\" points=\"";
        for (const auto& b : seg.breakpoints) {
            auto [x, y] = project(b.normalized());
            os << pad + x * scale << ',' << pad + (1 - y) * scale << ' ';
        }
        os << "\"/>\n";
    }
    os << "</svg>\n";
}

}  // namespace rauzy
