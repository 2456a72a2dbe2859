#include "errw/report.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace errw {

nlohmann::json to_json(const WardReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["estimate"] = r.estimate;
  j["se"] = r.se;
  j["target"] = r.target;
  j["is_bound"] = r.is_bound;
  j["z"] = r.z;
  j["verdict"] = r.verdict;
  j["samples"] = r.samples;
  j["ess"] = r.ess;
  return j;
}

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void append_run_ledger(const std::string& path, const WardReport& r) {
  bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream os(path, std::ios::app);
  if (!os) throw std::runtime_error("append_run_ledger: cannot open " + path);
  if (fresh) os << "name,estimate,se,target,z,verdict,samples,ess\n";
  os << r.name << ',' << fmt_double(r.estimate) << ',' << fmt_double(r.se) << ','
     << fmt_double(r.target) << ',' << fmt_double(r.z) << ',' << r.verdict << ','
     << r.samples << ',' << fmt_double(r.ess) << '\n';
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_text_file: cannot open " + path);
  os << content;
}

}  // namespace errw
