#pragma once

#include "cpext/convexity.hpp"
#include "cpext/cpmap.hpp"
#include "cpext/dilation.hpp"
#include "cpext/extremal.hpp"

#include <json.hpp>

#include <string>

namespace cpext {

using Json = nlohmann::json;

// Complex scalars are [re, im] arrays; matrices are row-major nested arrays.
Json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j, int expect_rows = -1, int expect_cols = -1);

Json to_json(const Tolerances& t);
Tolerances tolerances_from_json(const Json& j);

Json to_json(const CpMap& m);  // the MapFile schema
CpMap map_from_json(const Json& j);

Json to_json(const VerifyReport& r);

Json to_json(const Dilation& d);
Dilation dilation_from_json(const Json& j);

Json to_json(const CommutantElement& e);
CommutantElement commutant_from_json(const Json& j);

Json to_json(const NestedStructure& c);
NestedStructure certificate_from_json(const Json& j);

Json to_json(const DecompositionWitness& w);
DecompositionWitness witness_from_json(const Json& j);

/// The ReportFile schema: verdict tag, certificate or witness payload, and a
/// diagnostics object carrying the seed and the tolerances used.
Json report_to_json(const ExtremalityVerdict& v, const Tolerances& tol);
ExtremalityVerdict report_from_json(const Json& j, Tolerances* tol_out = nullptr);

Json to_json(const CombinationSpec& s);
CombinationSpec combination_from_json(const Json& j);

/// Strict parse: rejects malformed JSON and non-finite numbers with
/// ErrorCode::ParseError.
Json parse_json(const std::string& text);
Json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace cpext
