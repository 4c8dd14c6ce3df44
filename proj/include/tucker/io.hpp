#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "tucker/factor_point.hpp"
#include "tucker/search.hpp"
#include "tucker/tensor.hpp"

namespace tucker::io {

using nlohmann::json;

// {"dims":[d1,d2,d3],"data":[...]} row-major
json tensor_to_json(const Tensor3& t);
Tensor3 tensor_from_json(const json& j);

// "TKR1", three little-endian u64 dims, then little-endian f64 data.
void write_tensor_binary(std::ostream& out, const Tensor3& t);
Tensor3 read_tensor_binary(std::istream& in);

// Picks the format from the first bytes ("TKR1" magic vs JSON text).
Tensor3 load_tensor(const std::filesystem::path& path);
// Binary when the extension is .tkr, JSON otherwise. Extra JSON fields (e.g.
// generation metadata) are merged into the object.
void save_tensor(const std::filesystem::path& path, const Tensor3& t, const json& extra = json::object());

// {"r":..,"d":..,"S":{tensor},"A":[[..]],"B":[[..]],"C":[[..]]}
json factor_point_to_json(const FactorPoint& p);
FactorPoint factor_point_from_json(const json& j);
void save_factor_point(const std::filesystem::path& path, const FactorPoint& p);
FactorPoint load_factor_point(const std::filesystem::path& path);

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

// One JSON object per line. Wall time is left out unless include_timing.
json trace_record_to_json(const TraceRecord& rec, bool include_timing = false);
void write_trace_jsonl(std::ostream& out, const SearchTrace& trace, bool include_timing = false);
SearchTrace read_trace_jsonl(std::istream& in);

json thresholds_to_json(const Thresholds& th);

// Dump with a fixed float format so identical values give identical bytes.
std::string dump(const json& j, int indent = -1);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace tucker::io
