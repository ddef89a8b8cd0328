#ifndef XHINGE_TOOLS_SVG_HPP
#define XHINGE_TOOLS_SVG_HPP

#include "io.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace xhinge::svg {

/// One centerline drawn with its physical thickness.
struct Stroke {
  std::vector<Vec2> points;
  double height = 0.0;
};

struct Layer {
  std::string id;
  std::string color;
  std::vector<Stroke> strokes;
};

inline std::string render(const std::vector<Layer>& layers, double pixels_per_unit = 400.0) {
  double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
  double xmax = -xmin, ymax = -xmin, hmax = 0.0;
  for (const auto& l : layers)
    for (const auto& s : l.strokes) {
      hmax = std::max(hmax, s.height);
      for (const auto& p : s.points) {
        xmin = std::min(xmin, p.x());
        xmax = std::max(xmax, p.x());
        ymin = std::min(ymin, p.y());
        ymax = std::max(ymax, p.y());
      }
    }
  if (!std::isfinite(xmin)) xmin = ymin = 0.0, xmax = ymax = 1.0;
  const double margin = 0.05 * std::max({xmax - xmin, ymax - ymin, 1e-9}) + hmax;
  xmin -= margin;
  ymin -= margin;
  xmax += margin;
  ymax += margin;

  std::ostringstream out;
  out.precision(10);
  const double w = xmax - xmin, h = ymax - ymin;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w * pixels_per_unit << "\" height=\""
      << h * pixels_per_unit << "\" viewBox=\"" << xmin << ' ' << -ymax << ' ' << w << ' ' << h << "\">\n";
  for (const auto& l : layers) {
    out << "  <g id=\"" << l.id << "\" fill=\"none\" stroke=\"" << l.color
        << "\" stroke-linecap=\"butt\" stroke-linejoin=\"round\">\n";
    for (const auto& s : l.strokes) {
      out << "    <polyline stroke-width=\"" << s.height << "\" points=\"";
      for (std::size_t i = 0; i < s.points.size(); ++i)
        out << (i ? " " : "") << s.points[i].x() << ',' << -s.points[i].y(); // SVG y points down
      out << "\"/>\n";
    }
    out << "  </g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

inline Layer reference_layer(const HingeGeometry& g, const std::string& color) {
  Layer l{"reference", color, {}};
  for (const auto& f : g.flexures) l.strokes.push_back({positions(f.samples), f.height});
  return l;
}

/// Reference centerlines, plus the final traced configuration when a trace
/// is given: reference in gray, deformed solid black on top.
inline std::string render_design(const HingeGeometry& g, const io::json* trace = nullptr) {
  std::vector<Layer> layers;
  if (trace == nullptr || !trace->contains("steps") || trace->at("steps").empty()) {
    layers.push_back(reference_layer(g, "black"));
    return render(layers);
  }
  layers.push_back(reference_layer(g, "#999999"));
  const auto& last = trace->at("steps").back();
  Layer def{"deformed", "black", {}};
  if (last.contains("nodes")) {
    const auto& nodes = last.at("nodes");
    for (std::size_t f = 0; f < nodes.size() && f < g.flexures.size(); ++f)
      def.strokes.push_back({io::points_from_json(nodes[f]), g.flexures[f].height});
  }
  layers.push_back(std::move(def));
  return render(layers);
}

} // namespace xhinge::svg

#endif
