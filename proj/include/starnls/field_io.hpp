#pragma once

#include <iosfwd>
#include <string>

#include "starnls/field.hpp"

namespace starnls {

/// CSV with one metadata line `# {"N":..,"alpha":..,"mu":..,"L":..,"dx":..}`
/// followed by the columns edge,x,re,im. Floats use 17 significant digits.
void write_field_csv(std::ostream& out, const GraphField& f);
GraphField read_field_csv(std::istream& in);

void save_field(const std::string& path, const GraphField& f);
GraphField load_field(const std::string& path);

}  // namespace starnls
