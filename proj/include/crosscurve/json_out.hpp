#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace crosscurve {

// Deterministic JSON emission: insertion-ordered keys, floats printed with 17
// significant digits so identical runs produce byte-identical reports.
class JsonOut {
 public:
  static std::string number(double v);
  static std::string quote(const std::string& s);
  static std::string array(const Eigen::VectorXd& v);
  static std::string array(const std::vector<double>& v);

  JsonOut& key(const std::string& k);          // then call one of the raw/str/num/... below
  JsonOut& raw(const std::string& json);
  JsonOut& str(const std::string& v);
  JsonOut& num(double v);
  JsonOut& integer(long long v);
  JsonOut& boolean(bool v);
  JsonOut& null();

  std::string object() const;  // wraps accumulated pairs in { }

 private:
  std::vector<std::string> parts_;
  std::string pending_key_;
};

}  // namespace crosscurve
