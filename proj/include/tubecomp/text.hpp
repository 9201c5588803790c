#pragma once

#include <string>

namespace tubecomp {

// Shortest decimal text that parses back to the same double ("0.8", "1e-08", "inf").
std::string format_number(double value);

}  // namespace tubecomp
