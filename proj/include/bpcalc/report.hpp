#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace bpcalc {

/// 1e-8 (1 + |lhs| + |rhs|).
double numerical_slack(double lhs, double rhs);

/// 16 hex digits of FNV-1a over the bytes of the values.
std::string digest(std::initializer_list<double> values);
std::string digest(const Eigen::VectorXd& v);
std::string digest(const Eigen::VectorXcd& v);

struct VerificationRecord {
  std::size_t index = 0;
  std::string section;
  std::string digest;
  double lhs = 0.0;
  double rhs = 0.0;
  /// Positive when the inequality holds with room to spare.
  double margin = 0.0;
  bool skipped = false;
  std::string note;

  bool ok() const;
};

/// Per-sample records of one check. Records are kept in insertion order,
/// which every verifier makes equal to sample order.
class VerificationReport {
 public:
  VerificationReport(std::string check, std::uint64_t seed) : check_(std::move(check)), seed_(seed) {}

  const std::string& check() const noexcept { return check_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<VerificationRecord>& records() const noexcept { return records_; }
  const std::vector<std::pair<std::string, std::string>>& params() const noexcept { return params_; }
  const std::vector<std::string>& notes() const noexcept { return notes_; }

  /// Inequality lhs <= rhs; margin = rhs - lhs.
  void add(const std::string& section, std::string digest, double lhs, double rhs, std::string note = {});
  void add_margin(const std::string& section, std::string digest, double lhs, double rhs, double margin,
                  std::string note = {});
  void skip(const std::string& section, std::string digest, std::string note);
  void param(const std::string& key, const std::string& value);
  void param(const std::string& key, double value);
  void note(std::string text);

  /// True iff every non-skipped margin is >= -numerical_slack(lhs, rhs).
  bool pass() const;
  std::size_t failures() const;
  /// Smallest margin over non-skipped records (+inf when there are none).
  double worst_margin() const;

  /// check,section,index,digest,lhs,rhs,margin,status,note
  void write_csv(std::ostream& out, bool header = true) const;
  void write_summary(std::ostream& out) const;

 private:
  std::string check_;
  std::uint64_t seed_;
  std::vector<VerificationRecord> records_;
  std::vector<std::pair<std::string, std::string>> params_;
  std::vector<std::string> notes_;
};

}  // namespace bpcalc
