#include "crosscurve/json_out.hpp"

#include <cmath>
#include <cstdio>

namespace crosscurve {

std::string JsonOut::number(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";  // parsed back as +-inf
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string JsonOut::quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  out += '"';
  return out;
}

std::string JsonOut::array(const Eigen::VectorXd& v) {
  std::string out = "[";
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += number(v[i]);
  }
  return out + "]";
}

std::string JsonOut::array(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += number(v[i]);
  }
  return out + "]";
}

JsonOut& JsonOut::key(const std::string& k) {
  pending_key_ = quote(k) + ":";
  return *this;
}

JsonOut& JsonOut::raw(const std::string& json) {
  parts_.push_back(pending_key_ + json);
  pending_key_.clear();
  return *this;
}

JsonOut& JsonOut::str(const std::string& v) { return raw(quote(v)); }
JsonOut& JsonOut::num(double v) { return raw(number(v)); }
JsonOut& JsonOut::integer(long long v) { return raw(std::to_string(v)); }
JsonOut& JsonOut::boolean(bool v) { return raw(v ? "true" : "false"); }
JsonOut& JsonOut::null() { return raw("null"); }

std::string JsonOut::object() const {
  std::string out = "{";
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) out += ",";
    out += parts_[i];
  }
  return out + "}";
}

}  // namespace crosscurve
