#include "doseforge/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "doseforge/errors.hpp"

namespace doseforge {

namespace {

constexpr double width = 640.0, height = 420.0;
constexpr double ml = 64.0, mr = 20.0, mt = 32.0, mb = 44.0;

const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f5fa8", "#c2452d", "#3b8a4e",
                                 "#8a5fb0", "#b08b33", "#4f7f8a"};
  return colors[i % 6];
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

struct Scale {
  double lo = 0.0, hi = 1.0, out_lo = 0.0, out_hi = 1.0;
  double operator()(double x) const {
    return out_lo + (x - lo) / (hi - lo) * (out_hi - out_lo);
  }
};

Scale make_scale(double lo, double hi, double out_lo, double out_hi) {
  if (!(hi > lo)) {
    double pad = std::abs(lo) > 0.0 ? std::abs(lo) * 0.1 : 1.0;
    lo -= pad;
    hi += pad;
  }
  double pad = (hi - lo) * 0.04;
  return {lo - pad, hi + pad, out_lo, out_hi};
}

std::string open_svg(const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                  num(width) + "\" height=\"" + num(height) + "\" viewBox=\"0 0 " +
                  num(width) + " " + num(height) + "\">\n";
  s += "<rect width=\"" + num(width) + "\" height=\"" + num(height) +
       "\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(width / 2) + "\" y=\"20\" text-anchor=\"middle\" " +
       "font-family=\"sans-serif\" font-size=\"14\">" + title + "</text>\n";
  return s;
}

std::string axes(const Scale& sx, const Scale& sy) {
  std::string s;
  s += "<path d=\"M " + num(ml) + " " + num(mt) + " L " + num(ml) + " " +
       num(height - mb) + " L " + num(width - mr) + " " + num(height - mb) +
       "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    double fx = sx.lo + (sx.hi - sx.lo) * i / 5.0;
    double px = sx(fx);
    s += "<path d=\"M " + num(px) + " " + num(height - mb) + " L " + num(px) + " " +
         num(height - mb + 5) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    s += "<text x=\"" + num(px) + "\" y=\"" + num(height - mb + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
         num(fx) + "</text>\n";
    double fy = sy.lo + (sy.hi - sy.lo) * i / 5.0;
    double py = sy(fy);
    s += "<path d=\"M " + num(ml - 5) + " " + num(py) + " L " + num(ml) + " " +
         num(py) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    s += "<text x=\"" + num(ml - 8) + "\" y=\"" + num(py + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
         num(fy) + "</text>\n";
  }
  return s;
}

std::string polyline(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                     const Scale& sx, const Scale& sy) {
  std::string d;
  for (Eigen::Index i = 0; i < xs.size(); ++i)
    d += (i == 0 ? "M " : " L ") + num(sx(xs[i])) + " " + num(sy(ys[i]));
  return d;
}

}  // namespace

std::string curve_svg(const std::vector<CurveSummary>& curves,
                      const std::string& title) {
  if (curves.empty()) throw config_error("nothing to plot");
  double xlo = curves[0].grid.doses.minCoeff(), xhi = curves[0].grid.doses.maxCoeff();
  double ylo = curves[0].q025.minCoeff(), yhi = curves[0].q975.maxCoeff();
  for (const auto& c : curves) {
    xlo = std::min(xlo, c.grid.doses.minCoeff());
    xhi = std::max(xhi, c.grid.doses.maxCoeff());
    ylo = std::min(ylo, c.q025.minCoeff());
    yhi = std::max(yhi, c.q975.maxCoeff());
  }
  Scale sx = make_scale(xlo, xhi, ml, width - mr);
  Scale sy = make_scale(ylo, yhi, height - mb, mt);

  std::string s = open_svg(title);
  s += axes(sx, sy);
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& c = curves[k];
    std::string band = polyline(c.grid.doses, c.q025, sx, sy);
    for (Eigen::Index i = c.grid.size() - 1; i >= 0; --i)
      band += " L " + num(sx(c.grid.doses[i])) + " " + num(sy(c.q975[i]));
    band += " Z";
    s += "<path d=\"" + band + "\" fill=\"" + palette(k) +
         "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    s += "<path d=\"" + polyline(c.grid.doses, c.mean, sx, sy) +
         "\" fill=\"none\" stroke=\"" + palette(k) + "\" stroke-width=\"1.5\"/>\n";
    if (!c.label.empty())
      s += "<text x=\"" + num(width - mr - 4) + "\" y=\"" + num(mt + 16.0 * (k + 1)) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" "
           "fill=\"" +
           palette(k) + "\">" + c.label + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string contour_svg(const std::vector<Contour>& contours,
                        const std::string& title) {
  if (contours.empty()) throw config_error("nothing to plot");
  double xlo = contours[0].points.col(0).minCoeff();
  double xhi = contours[0].points.col(0).maxCoeff();
  double ylo = contours[0].points.col(1).minCoeff();
  double yhi = contours[0].points.col(1).maxCoeff();
  for (const auto& c : contours) {
    xlo = std::min(xlo, c.points.col(0).minCoeff());
    xhi = std::max(xhi, c.points.col(0).maxCoeff());
    ylo = std::min(ylo, c.points.col(1).minCoeff());
    yhi = std::max(yhi, c.points.col(1).maxCoeff());
  }
  Scale sx = make_scale(xlo, xhi, ml, width - mr);
  Scale sy = make_scale(ylo, yhi, height - mb, mt);

  std::string s = open_svg(title);
  s += axes(sx, sy);
  for (std::size_t k = 0; k < contours.size(); ++k) {
    const auto& c = contours[k];
    s += "<path d=\"" +
         polyline(c.points.col(0).eval(), c.points.col(1).eval(), sx, sy) +
         " Z\" fill=\"none\" stroke=\"" + palette(k) + "\" stroke-width=\"1.5\"/>\n";
    double cx = c.points.col(0).mean(), cy = c.points.col(1).mean();
    s += "<text x=\"" + num(sx(cx)) + "\" y=\"" + num(sy(cy)) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
         "fill=\"" +
         palette(k) + "\">" + num(c.dose) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace doseforge
