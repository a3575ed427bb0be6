#include "convaff/json_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>

namespace convaff {

namespace {

void write_string(std::ostringstream& out, const std::string& s) {
  out << Json(s).dump();
}

void write_number(std::ostringstream& out, double v) {
  if (std::isnan(v)) {
    out << "\"nan\"";
  } else if (std::isinf(v)) {
    out << (v > 0 ? "\"inf\"" : "\"-inf\"");
  } else {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  }
}

void write(std::ostringstream& out, const Json& v, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << pad;
        write_string(out, it.key());
        out << ": ";
        write(out, it.value(), depth + 1);
      }
      out << "\n" << close << "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& e : v) flat = flat && !e.is_structured();
      if (flat) {
        out << "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out << ", ";
          write(out, v[i], depth + 1);
        }
        out << "]";
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ",\n";
        out << pad;
        write(out, v[i], depth + 1);
      }
      out << "\n" << close << "]";
      return;
    }
    case Json::value_t::number_float:
      write_number(out, v.get<double>());
      return;
    case Json::value_t::string:
      write_string(out, v.get<std::string>());
      return;
    default:
      out << v.dump();
      return;
  }
}

}  // namespace

std::string dump_json(const Json& value) {
  std::ostringstream out;
  write(out, value, 0);
  out << "\n";
  return out.str();
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json to_json(const Vector<double>& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const Matrix<double>& points) {
  Json out = Json::array();
  for (Index k = 0; k < points.cols(); ++k) out.push_back(to_json(Vector<double>(points.col(k))));
  return out;
}

Json to_json(const MaxAffineFn<double>& f) {
  Json pieces = Json::array();
  for (Index i = 0; i < f.pieces(); ++i) {
    pieces.push_back({{"a", to_json(Vector<double>(f.slopes().row(i).transpose()))},
                      {"b", f.offsets()(i)}});
  }
  return {{"pieces", pieces}};
}

Json to_json(const PolyhedralSublinear<double>& s) {
  return {{"pieces", to_json(Matrix<double>(s.pieces().transpose()))}};
}

Json to_json(const AffineMap<double>& a) { return {{"w", to_json(a.w)}, {"c", a.c}}; }

Json to_json(const MidpointReport& r) {
  Json out{{"status", to_string(r.status)}, {"structural", r.structural}};
  if (!r.note.empty()) out["note"] = r.note;
  if (r.satisfied()) {
    Json w = Json::array();
    for (const auto& p : r.witnesses)
      w.push_back({{"pair", {p.first, p.second}}, {"witness", p.candidate}, {"value", p.value}});
    out["witnesses"] = w;
  } else {
    out["violated_pairs"] = r.violated_pairs;
    out["worst"] = {{"pair", {r.worst.first, r.worst.second}},
                    {"best_candidate", r.worst.candidate},
                    {"value", r.worst.value}};
  }
  return out;
}

}  // namespace convaff
