#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "errw/ward.hpp"

namespace errw {

nlohmann::json to_json(const WardReport& r);

// Appends one run-ledger row (name, estimate, se, target, z, verdict,
// samples, ess); writes the header when the file is new.
void append_run_ledger(const std::string& path, const WardReport& r);

// Stable float formatting for CSV/JSON output (shortest round-trip form),
// so identical runs produce byte-identical files.
std::string fmt_double(double v);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace errw
