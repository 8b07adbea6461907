#include "weylflow/report.hpp"

#include <cstdio>
#include <sstream>

namespace weylflow {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 8);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string reports_to_json(std::span<const CheckReport> reports, std::uint64_t seed,
                            int point_count) {
  std::ostringstream os;
  os << "{\"schema\":1,\"meta\":{\"tool\":\"weylflow\",\"seed\":" << seed
     << ",\"points\":" << point_count << "},\"results\":[";
  for (size_t i = 0; i < reports.size(); ++i) {
    const CheckReport& r = reports[i];
    if (i) os << ",";
    os << "{\"check_id\":\"" << json_escape(r.check_id) << "\",\"statement\":\""
       << json_escape(r.statement) << "\",\"metric\":\"" << json_escape(r.metric)
       << "\",\"n_points\":" << r.n_points << ",\"max_residual\":" << format_double(r.max_residual)
       << ",\"tolerance\":" << format_double(r.tolerance)
       << ",\"pass\":" << (r.pass ? "true" : "false") << ",\"status\":\""
       << json_escape(r.status) << "\",\"convergence\":[";
    for (size_t c = 0; c < r.convergence.size(); ++c) {
      if (c) os << ",";
      os << "{\"h\":" << format_double(r.convergence[c].h)
         << ",\"residual\":" << format_double(r.convergence[c].residual) << "}";
    }
    os << "]}";
  }
  os << "],\"failures\":" << count_failures(reports) << "}";
  return os.str();
}

int count_failures(std::span<const CheckReport> reports) {
  int n = 0;
  for (const auto& r : reports)
    if (!r.pass) ++n;
  return n;
}

std::string csv_line(std::span<const double> values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format_double(values[i]);
  }
  out += "\n";
  return out;
}

}  // namespace weylflow
