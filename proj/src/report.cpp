#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "aesprice/experiments.hpp"
#include "json.hpp"

namespace aesprice {

using nlohmann::json;

namespace {

// Shortest round-trip representation, independent of stream state.
std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

}  // namespace

void write_csv(const ExperimentReport& report, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& row : report.rows) {
    out << csv_field(row.experiment) << ',' << csv_field(row.case_label) << ',' << to_string(row.scheme) << ','
        << row.n_steps << ',' << row.n_paths << ',' << row.runs << ',' << format_number(row.mean_price) << ','
        << format_number(row.run_std) << ',' << (row.ref_price ? format_number(*row.ref_price) : "") << ','
        << (row.rel_error ? format_number(*row.rel_error) : "") << ',' << format_number(row.elapsed_s) << ','
        << row.memory_bytes << '\n';
  }
}

std::string to_json(const ExperimentReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    rows.push_back({
        {"experiment", row.experiment},
        {"group", row.group},
        {"case", row.case_label},
        {"case_value", row.case_value},
        {"scheme", std::string(to_string(row.scheme))},
        {"n_steps", row.n_steps},
        {"n_paths", row.n_paths},
        {"runs", row.runs},
        {"mean_price", row.mean_price},
        {"run_std", row.run_std},
        {"mean_std_error", row.mean_std_error},
        {"ref_price", optional_number(row.ref_price)},
        {"rel_error", optional_number(row.rel_error)},
        {"ref_source", row.ref_source},
        {"paper_value", optional_number(row.paper_value)},
        {"elapsed_s", row.elapsed_s},
        {"memory_bytes", row.memory_bytes},
        {"exercise_indices", row.exercise_indices},
        {"run_prices", row.run_prices},
    });
  }
  json root = {{"id", report.id}, {"rows", rows}};
  return root.dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& json_text) {
  try {
    const json root = json::parse(json_text);
    ExperimentReport report;
    report.id = root.at("id").get<std::string>();
    for (const auto& j : root.at("rows")) {
      CaseResult row;
      row.experiment = j.at("experiment").get<std::string>();
      row.group = j.value("group", "");
      row.case_label = j.at("case").get<std::string>();
      row.case_value = j.at("case_value").get<double>();
      row.scheme = parse_scheme(j.at("scheme").get<std::string>());
      row.n_steps = j.at("n_steps").get<std::size_t>();
      row.n_paths = j.at("n_paths").get<std::size_t>();
      row.runs = j.at("runs").get<std::size_t>();
      row.mean_price = j.at("mean_price").get<double>();
      row.run_std = j.at("run_std").get<double>();
      row.mean_std_error = j.value("mean_std_error", 0.0);
      row.ref_price = read_optional(j, "ref_price");
      row.rel_error = read_optional(j, "rel_error");
      row.ref_source = j.value("ref_source", "");
      row.paper_value = read_optional(j, "paper_value");
      row.elapsed_s = j.at("elapsed_s").get<double>();
      row.memory_bytes = j.at("memory_bytes").get<std::size_t>();
      row.exercise_indices = j.value("exercise_indices", std::vector<std::size_t>{});
      row.run_prices = j.value("run_prices", std::vector<double>{});
      report.rows.push_back(std::move(row));
    }
    return report;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("report: ") + e.what());
  }
}

void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open report file " + path + " for writing");
  if (format == ReportFormat::Csv) {
    write_csv(report, out);
  } else {
    out << to_json(report);
  }
  out.flush();
  if (!out) throw std::runtime_error("failed writing report file " + path);
}

}  // namespace aesprice
