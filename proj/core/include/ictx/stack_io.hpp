// Structured text serialization for layer stacks: layers in order with
// declared dims, matrices row-major, 17-significant-digit decimals.

#pragma once

#include <iosfwd>
#include <string>

#include "ictx/attention.hpp"

namespace ictx {

void write_stack(std::ostream& os, const LayerStack& stack);
LayerStack read_stack(std::istream& is);

void save_stack(const std::string& path, const LayerStack& stack);
LayerStack load_stack(const std::string& path);

}  // namespace ictx
