#include "flatpoly/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace flatpoly {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string format_fixed(double v, int digits) {
  if (!std::isfinite(v)) return format_double(v);
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, digits);
  if (res.ec != std::errc()) return format_double(v);
  return std::string(buf.data(), res.ptr);
}

void CsvWriter::sep() {
  if (!first_) out_ << ',';
  first_ = false;
}

void CsvWriter::header(const std::vector<std::string>& names) {
  for (const auto& n : names) field(std::string_view(n));
  end_row();
}

CsvWriter& CsvWriter::field(double v) {
  sep();
  out_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::field(long v) {
  sep();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::field(std::string_view v) {
  sep();
  if (v.find_first_of(",\"\n") == std::string_view::npos) {
    out_ << v;
    return *this;
  }
  out_ << '"';
  for (char c : v) {
    if (c == '"') out_ << '"';
    out_ << c;
  }
  out_ << '"';
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

void write_trace_csv(std::ostream& out, const std::vector<pmsm::TraceRow>& trace) {
  CsvWriter w(out);
  w.header({"t", "id", "iq", "vd", "vq", "omega", "tau", "tau_ref", "J", "iters", "status"});
  for (const auto& r : trace) {
    w.field(r.t).field(r.i_d).field(r.i_q).field(r.v_d).field(r.v_q).field(r.omega);
    w.field(r.torque).field(r.torque_ref).field(r.cost).field(static_cast<long>(r.iterations));
    w.field(std::string_view(r.status));
    w.end_row();
  }
}

}  // namespace flatpoly
