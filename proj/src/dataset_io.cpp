#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "relguide/errors.hpp"
#include "relguide/rdp_generator.hpp"

namespace relguide {

namespace {

constexpr std::string_view kHeader = "dx_m,dy_m,dpsi_rad,time_s,plan";

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view s, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument(std::string("bad ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::string format_plan_field(const ManeuverPlan& plan) {
  std::string out;
  for (std::size_t i = 0; i < plan.triplets.size(); ++i) {
    const auto& t = plan.triplets[i];
    if (i) out += ';';
    out += std::to_string(t.eps);
    out += ':';
    out += fmt_double(t.theta);
    out += ':';
    out += fmt_double(t.len);
  }
  return out;
}

ManeuverPlan parse_plan_field(const std::string& field, double r_min) {
  ManeuverPlan plan;
  plan.r_min = r_min;
  if (field.empty()) return plan;
  for (std::string_view item : split(field, ';')) {
    const auto parts = split(item, ':');
    if (parts.size() != 3) throw std::invalid_argument("plan triplet needs eps:theta:len");
    PlanTriplet t;
    if (parts[0] == "1" || parts[0] == "+1") {
      t.eps = 1;
    } else if (parts[0] == "-1") {
      t.eps = -1;
    } else {
      throw std::invalid_argument("eps must be 1 or -1");
    }
    t.theta = parse_double(parts[1], "theta");
    t.len = parse_double(parts[2], "len");
    plan.triplets.push_back(t);
  }
  validate_plan(plan);
  return plan;
}

void export_dataset(const std::vector<TrainingSample>& samples, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw missing_file(path);
  out << kHeader << '\n';
  for (const auto& s : samples) {
    out << fmt_double(s.state.dx) << ',' << fmt_double(s.state.dy) << ','
        << fmt_double(s.state.dpsi) << ',' << fmt_double(s.time_to_converge) << ','
        << format_plan_field(s.plan) << '\n';
  }
  if (!out) throw Error(ErrorKind::kMissingFile, "write failed: " + path);
}

std::vector<TrainingSample> import_dataset(const std::string& path, double r_min) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw missing_file(path);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw schema_error(path + ":1: expected header '" + std::string(kHeader) + "'");
  }
  std::vector<TrainingSample> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      const auto cols = split(line, ',');
      if (cols.size() != 5) throw std::invalid_argument("expected 5 columns");
      TrainingSample s;
      s.state.dx = parse_double(cols[0], "dx_m");
      s.state.dy = parse_double(cols[1], "dy_m");
      s.state.dpsi = parse_double(cols[2], "dpsi_rad");
      s.time_to_converge = parse_double(cols[3], "time_s");
      s.plan = parse_plan_field(std::string(cols[4]), r_min);
      samples.push_back(std::move(s));
    } catch (const std::invalid_argument& e) {
      std::ostringstream msg;
      msg << path << ':' << line_no << ": " << e.what();
      throw schema_error(msg.str());
    }
  }
  return samples;
}

}  // namespace relguide
