// Columnar text serialization for particle measures.
//
// Format: a header line `d=<int> spacetime=<0|1>`, then one particle per
// line as `weight x_1 ... x_d [time]`. Lines starting with '#' are
// comments. Values are printed with 17 significant digits, which makes
// write/read round trips bit-faithful for doubles.

#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "ictx/measure.hpp"

namespace ictx {

using AnyMeasure = std::variant<ParticleMeasure, SpaceTimeMeasure>;

void write_measure(std::ostream& os, const ParticleMeasure& mu);
void write_measure(std::ostream& os, const SpaceTimeMeasure& mu);

AnyMeasure read_measure(std::istream& is);

void save_measure(const std::string& path, const AnyMeasure& mu);
AnyMeasure load_measure(const std::string& path);

/// Shortest decimal form that parses back to the same double (17 digits).
std::string format_double(double x);

}  // namespace ictx
