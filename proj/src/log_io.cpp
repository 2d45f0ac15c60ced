#include "npasa/driver.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace npasa {

using nlohmann::json;

std::string log_record_to_json(const LogRecord& rec) {
  json j;
  j["k"] = rec.k;
  j["phase"] = rec.phase;
  j["q"] = rec.q;
  j["e"] = rec.e;
  if (rec.e0) {
    j["e0"] = *rec.e0;
  } else {
    j["e0"] = nullptr;
  }
  j["e1"] = rec.e1;
  j["em1"] = rec.em1;
  j["ec"] = rec.ec;
  if (rec.em1_mu1) j["em1_mu1"] = *rec.em1_mu1;
  j["constraint_iters"] = rec.constraint_iters;
  j["multiplier_iters"] = rec.multiplier_iters;
  j["accepted"] = rec.accepted;
  j["alpha_failure"] = rec.alpha_failure;
  j["backtrack_floor"] = rec.backtrack_floor;
  j["decrease_failure"] = rec.decrease_failure;
  j["rejected"] = rec.rejected;
  j["wall_time_sec"] = rec.wall_time_sec;
  return j.dump();
}

LogRecord log_record_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("log record: ") + e.what());
  }
  LogRecord rec;
  try {
    rec.k = j.at("k").get<int>();
    rec.phase = j.at("phase").get<int>();
    rec.q = j.at("q").get<double>();
    rec.e = j.at("e").get<double>();
    if (j.contains("e0") && !j["e0"].is_null()) rec.e0 = j["e0"].get<double>();
    rec.e1 = j.at("e1").get<double>();
    rec.em1 = j.at("em1").get<double>();
    rec.ec = j.at("ec").get<double>();
    if (j.contains("em1_mu1") && !j["em1_mu1"].is_null()) rec.em1_mu1 = j["em1_mu1"].get<double>();
    rec.constraint_iters = j.value("constraint_iters", 0);
    rec.multiplier_iters = j.value("multiplier_iters", 0);
    rec.accepted = j.value("accepted", true);
    rec.alpha_failure = j.value("alpha_failure", false);
    rec.backtrack_floor = j.value("backtrack_floor", false);
    rec.decrease_failure = j.value("decrease_failure", false);
    rec.rejected = j.value("rejected", false);
    rec.wall_time_sec = j.value("wall_time_sec", 0.0);
  } catch (const json::exception& e) {
    throw ParseError(std::string("log record: ") + e.what());
  }
  return rec;
}

void write_log_file(const std::string& path, const std::vector<LogRecord>& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write log file '" + path + "'");
  for (const auto& rec : log) out << log_record_to_json(rec) << "\n";
}

std::vector<LogRecord> read_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open log file '" + path + "'");
  std::vector<LogRecord> log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    log.push_back(log_record_from_json(line));
  }
  return log;
}

}  // namespace npasa
