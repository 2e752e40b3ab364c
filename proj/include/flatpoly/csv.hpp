#pragma once

// Locale-independent CSV output ('\n' line endings, shortest round-trip
// formatting for doubles).

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "flatpoly/pmsm.hpp"

namespace flatpoly {

std::string format_double(double v);
/// Fixed notation with `digits` decimals.
std::string format_fixed(double v, int digits);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(const std::vector<std::string>& names);
  CsvWriter& field(double v);
  CsvWriter& field(long v);
  CsvWriter& field(std::string_view v);
  void end_row();

 private:
  std::ostream& out_;
  bool first_ = true;

  void sep();
};

/// Header: t,id,iq,vd,vq,omega,tau,tau_ref,J,iters,status
void write_trace_csv(std::ostream& out, const std::vector<pmsm::TraceRow>& trace);

}  // namespace flatpoly
