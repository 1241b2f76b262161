#include "ictx/measure_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ictx {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void write_header(std::ostream& os, Eigen::Index d, bool spacetime) {
  os << "d=" << d << " spacetime=" << (spacetime ? 1 : 0) << "\n";
}

// Reads the next non-comment, non-blank line; false at EOF.
bool next_line(std::istream& is, std::string& line) {
  while (std::getline(is, line)) {
    std::size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    if (line[pos] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

void write_measure(std::ostream& os, const ParticleMeasure& mu) {
  write_header(os, mu.dim(), false);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    os << format_double(mu.weight(i));
    for (Eigen::Index c = 0; c < mu.dim(); ++c)
      os << ' ' << format_double(mu.point(i)(c));
    os << "\n";
  }
}

void write_measure(std::ostream& os, const SpaceTimeMeasure& mu) {
  write_header(os, mu.dim(), true);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    os << format_double(mu.weight(i));
    for (Eigen::Index c = 0; c < mu.dim(); ++c)
      os << ' ' << format_double(mu.point(i)(c));
    os << ' ' << format_double(mu.time(i)) << "\n";
  }
}

AnyMeasure read_measure(std::istream& is) {
  std::string line;
  if (!next_line(is, line)) throw std::runtime_error("measure file: missing header");
  long d = -1;
  int spacetime = -1;
  {
    std::istringstream hs(line);
    std::string tok;
    while (hs >> tok) {
      if (tok.rfind("d=", 0) == 0)
        d = std::stol(tok.substr(2));
      else if (tok.rfind("spacetime=", 0) == 0)
        spacetime = std::stoi(tok.substr(10));
      else
        throw std::runtime_error("measure file: bad header token '" + tok + "'");
    }
  }
  if (d <= 0 || (spacetime != 0 && spacetime != 1))
    throw std::runtime_error("measure file: bad header");

  std::vector<Vec> points;
  std::vector<double> times, weights;
  while (next_line(is, line)) {
    std::istringstream ls(line);
    double w;
    if (!(ls >> w)) throw std::runtime_error("measure file: bad particle line");
    Vec p(d);
    for (long c = 0; c < d; ++c)
      if (!(ls >> p(c))) throw std::runtime_error("measure file: truncated particle");
    double t = 0.0;
    if (spacetime == 1 && !(ls >> t))
      throw std::runtime_error("measure file: missing time");
    std::string extra;
    if (ls >> extra) throw std::runtime_error("measure file: trailing data");
    weights.push_back(w);
    points.push_back(std::move(p));
    if (spacetime == 1) times.push_back(t);
  }
  if (spacetime == 1)
    return SpaceTimeMeasure(std::move(points), std::move(times), std::move(weights));
  return ParticleMeasure(std::move(points), std::move(weights));
}

void save_measure(const std::string& path, const AnyMeasure& mu) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  std::visit([&os](const auto& m) { write_measure(os, m); }, mu);
}

AnyMeasure load_measure(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_measure(is);
}

}  // namespace ictx
