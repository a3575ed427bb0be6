#ifndef CONVAFF_JSON_IO_HPP
#define CONVAFF_JSON_IO_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "convaff/core.hpp"
#include "convaff/midpoint.hpp"

namespace convaff {

using Json = nlohmann::json;

/// Serializes `value` compactly with two-space indentation; floating point
/// numbers are written with 17 significant digits (so they parse back to
/// the same double) and non-finite values as the strings "inf", "-inf",
/// "nan".
std::string dump_json(const Json& value);

/// 64-bit FNV-1a of the bytes of `text`, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& text);

Json to_json(const Vector<double>& v);
Json to_json(const Matrix<double>& columns_as_points);  // array of columns
Json to_json(const MaxAffineFn<double>& f);
Json to_json(const PolyhedralSublinear<double>& s);
Json to_json(const AffineMap<double>& a);
Json to_json(const MidpointReport& r);

}  // namespace convaff

#endif  // CONVAFF_JSON_IO_HPP
