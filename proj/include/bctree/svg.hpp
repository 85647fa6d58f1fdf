#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "bctree/experiments.hpp"

namespace bctree {

// Static line plot of mean tree size vs mu for one sweep table. Hand-rolled
// so the output bytes are fully deterministic.
inline std::string sweep_svg(const SweepTable& table, const std::string& title) {
  const int width = 640, height = 400;
  const int ml = 70, mr = 20, mt = 40, mb = 50;
  const double pw = width - ml - mr;
  const double ph = height - mt - mb;

  double ymin = 0.0, ymax = 1.0;
  bool first = true;
  for (const SweepRow& r : table.rows) {
    if (r.n == 0) continue;
    if (first) {
      ymin = ymax = r.mean;
      first = false;
    } else {
      ymin = std::min(ymin, r.mean);
      ymax = std::max(ymax, r.mean);
    }
  }
  if (ymax - ymin < 1e-12) ymax = ymin + 1.0;

  auto px = [&](double mu) { return ml + mu * pw; };
  auto py = [&](double y) { return mt + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };
  auto num = [&](double v) { return detail::format_double(v); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  os << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"14\">"
     << title << "</text>\n";
  // axes
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
     << mt + ph << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">mu</text>\n";
  os << "<text x=\"18\" y=\"" << mt + ph / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 "
        "18 "
     << mt + ph / 2 << ")\">mean tree size</text>\n";
  // tick labels
  os << "<text x=\"" << ml << "\" y=\"" << mt + ph + 16
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">0</text>\n";
  os << "<text x=\"" << ml + pw << "\" y=\"" << mt + ph + 16
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">1</text>\n";
  os << "<text x=\"" << ml - 6 << "\" y=\"" << py(ymin) + 4
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << num(ymin)
     << "</text>\n";
  os << "<text x=\"" << ml - 6 << "\" y=\"" << py(ymax) + 4
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << num(ymax)
     << "</text>\n";
  // curve
  os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  bool firstpt = true;
  for (const SweepRow& r : table.rows) {
    if (r.n == 0) continue;
    if (!firstpt) os << " ";
    os << num(px(r.mu)) << "," << num(py(r.mean));
    firstpt = false;
  }
  os << "\"/>\n</svg>\n";
  return os.str();
}

}  // namespace bctree
