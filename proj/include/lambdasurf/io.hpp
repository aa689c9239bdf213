#ifndef LAMBDASURF_IO_HPP
#define LAMBDASURF_IO_HPP

#include <string>

namespace lambdasurf {

/// Shortest-faithful decimal form at 17 significant digits; "inf"/"nan"
/// pass through lowercase.
std::string fmt17(double v);

/// 9 significant digits (mesh export).
std::string fmt9(double v);

}  // namespace lambdasurf

#endif
