#ifndef BISAM_TRACE_IO_HPP
#define BISAM_TRACE_IO_HPP

#include "bisam/solvers.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace bisam {

inline constexpr const char* kTraceCsvHeader =
    "n,theta,alpha,eps,phi,h,dist_ref,inertia_mag,seconds";

inline std::string trace_row_csv(const TraceRow& row, bool include_seconds = true) {
  std::ostringstream os;
  os.precision(17);
  os << row.n << ',' << row.theta << ',' << row.alpha << ',' << row.eps << ','
     << row.inner_objective << ',' << row.outer_objective << ',';
  if (std::isnan(row.dist_to_reference))
    os << "nan";
  else
    os << row.dist_to_reference;
  os << ',' << row.inertia_magnitude;
  if (include_seconds) os << ',' << row.elapsed_seconds;
  return os.str();
}

inline void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
  out << kTraceCsvHeader << '\n';
  for (const TraceRow& row : trace) out << trace_row_csv(row) << '\n';
}

inline void write_trace_csv(const std::string& path, const IterationTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
  write_trace_csv(out, trace);
}

}  // namespace bisam

#endif
