#pragma once

// Static SVG overlay of lambda-hat and the candidate lambda curves.

#include <algorithm>
#include <array>
#include <cstdio>
#include <ostream>
#include <string>

#include "kendall.hpp"

namespace censcop {

inline void write_lambda_svg(std::ostream& out, const GraphicalTable& t, int width = 640,
                             int height = 420) {
  constexpr int pad = 48;
  double lo = 0.0;
  for (double v : t.lambda_hat) lo = std::min(lo, v);
  for (const auto& c : t.columns)
    for (double v : c.lambda) lo = std::min(lo, v);
  if (lo >= 0.0) lo = -1.0;
  const double pw = width - 2.0 * pad;
  const double ph = height - 2.0 * pad;
  auto px = [&](double nu) { return pad + nu * pw; };
  auto py = [&](double lam) { return pad + (lam / lo) * ph; };
  auto num = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return std::string(buf);
  };
  auto path = [&](const std::vector<double>& y) {
    std::string d;
    for (std::size_t i = 0; i < t.nu.size(); ++i)
      d += (i ? " L" : "M") + num(px(t.nu[i])) + "," + num(py(y[i]));
    return d;
  };
  static constexpr std::array<const char*, 5> colors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                        "#8c564b"};
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << width - pad << "\" y2=\"" << pad
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << height - pad
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"" << pad - 16 << "\" text-anchor=\"middle\">nu</text>\n";
  out << "<text x=\"" << pad - 8 << "\" y=\"" << height - pad << "\" text-anchor=\"end\">" << num(lo)
      << "</text>\n";
  out << "<path d=\"" << path(t.lambda_hat) << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
  int legend_y = height - pad + 20;
  out << "<text x=\"" << pad << "\" y=\"" << legend_y << "\">lambda_hat</text>\n";
  for (std::size_t k = 0; k < t.columns.size(); ++k) {
    const char* col = colors[k % colors.size()];
    out << "<path d=\"" << path(t.columns[k].lambda) << "\" fill=\"none\" stroke=\"" << col
        << "\" stroke-dasharray=\"6,3\"/>\n";
    out << "<text x=\"" << pad + 100 * (k + 1) << "\" y=\"" << legend_y << "\" fill=\"" << col << "\">"
        << family_name(t.columns[k].family) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace censcop
